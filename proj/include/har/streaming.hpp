#pragma once

#include "har/config.hpp"
#include "har/pipeline.hpp"
#include "har/skeleton.hpp"

#include <iosfwd>
#include <optional>

namespace har
{
// Splits a live skeleton stream into action segments. A segment closes when
// the fastest landmark's speed stays below the motion threshold for idle_gap_s, when
// consecutive timestamps are further apart than idle_gap_s, or on flush().
// Idle stretches are not part of any segment.
class Segmenter
{
 public:
   explicit Segmenter(StreamConfig cfg);

   std::optional<PoseSequence> push(const Skeleton3D& frame);
   std::optional<PoseSequence> flush();

   std::size_t skipped() const noexcept { return skipped_; }

 private:
   std::optional<PoseSequence> close();
   void restart(const Skeleton3D& frame);

   StreamConfig cfg_;
   std::vector<Skeleton3D> frames_;
   std::size_t last_active_ = 0;
   bool active_             = false;
   double idle_s_           = 0.0;
   std::size_t skipped_     = 0;
};

// Speed of the fastest landmark between two frames (m/s); 0 when dt <= 0.
double peak_landmark_speed(const Skeleton3D& a, const Skeleton3D& b);

enum class StreamInput
{
   Skeleton,  // neutral NDJSON frames
   RawFrames, // capture adapter records (header + frames), lifted on the fly
};

struct StreamSummary
{
   std::size_t frames   = 0;
   std::size_t segments = 0;
   std::size_t dropped  = 0; // discarded by the bounded queue
   std::size_t skipped  = 0; // out-of-order or unusable
};

// Reader thread parses `in` into a bounded queue; the calling thread
// segments and classifies, writing one JSON line per segment to `out`.
// Parse errors in the input are rethrown after the reader stops.
StreamSummary run_stream_classifier(std::istream& in, std::ostream& out, const TrainedPipeline& pipeline,
                                    StreamInput input = StreamInput::Skeleton);

} // namespace har
