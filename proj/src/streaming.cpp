#include "har/streaming.hpp"

#include "har/bounded_queue.hpp"
#include "har/depth_lift.hpp"
#include "har/errors.hpp"
#include "har/skeleton_io.hpp"
#include "har/uav_bridge.hpp"

#include <json.hpp>

#include <algorithm>
#include <exception>
#include <istream>
#include <ostream>
#include <thread>

namespace har
{
double peak_landmark_speed(const Skeleton3D& a, const Skeleton3D& b)
{
   const double dt = b.timestamp - a.timestamp;
   if(!(dt > 0.0)) return 0.0;
   double fastest = 0.0;
   for(std::size_t i = 0; i < k_landmark_count; ++i) {
      const Vec3 d = b.points[i] - a.points[i];
      if(d.allFinite()) fastest = std::max(fastest, d.norm());
   }
   return fastest / dt;
}

Segmenter::Segmenter(StreamConfig cfg)
    : cfg_(cfg)
{
   cfg_.validate();
}

void Segmenter::restart(const Skeleton3D& frame)
{
   frames_.assign(1, frame);
   active_      = false;
   idle_s_      = 0.0;
   last_active_ = 0;
}

std::optional<PoseSequence> Segmenter::close()
{
   if(!active_) return std::nullopt;
   PoseSequence seq;
   seq.frames.assign(frames_.begin(), frames_.begin() + static_cast<std::ptrdiff_t>(last_active_ + 1));
   active_ = false;
   if(seq.size() < cfg_.min_frames) return std::nullopt;
   return seq;
}

std::optional<PoseSequence> Segmenter::push(const Skeleton3D& frame)
{
   if(frames_.empty()) {
      restart(frame);
      return std::nullopt;
   }
   const Skeleton3D& prev = frames_.back();
   const double dt        = frame.timestamp - prev.timestamp;
   if(!(dt > 0.0)) {
      ++skipped_;
      return std::nullopt;
   }
   if(dt > cfg_.idle_gap_s) {
      auto seg = close();
      restart(frame);
      return seg;
   }

   const bool moving = peak_landmark_speed(prev, frame) >= cfg_.motion_threshold;
   if(!active_ && !moving) {
      // nothing happening: keep only the latest frame as a possible start
      restart(frame);
      return std::nullopt;
   }
   frames_.push_back(frame);
   if(moving) {
      active_      = true;
      idle_s_      = 0.0;
      last_active_ = frames_.size() - 1;
      return std::nullopt;
   }
   idle_s_ += dt;
   if(idle_s_ >= cfg_.idle_gap_s) {
      auto seg = close();
      restart(frame);
      return seg;
   }
   return std::nullopt;
}

std::optional<PoseSequence> Segmenter::flush()
{
   auto seg = close();
   frames_.clear();
   return seg;
}

namespace
{
nlohmann::ordered_json segment_record(std::size_t index, const PoseSequence& seg, const ClassificationResult& r,
                                      const Command& cmd)
{
   nlohmann::ordered_json j;
   j["segment"]     = index;
   j["t_start"]     = seg.frames.front().timestamp;
   j["t_end"]       = seg.frames.back().timestamp;
   j["frames"]      = seg.size();
   j["label"]       = r.label ? nlohmann::ordered_json(*r.label) : nlohmann::ordered_json(nullptr);
   j["null_action"] = r.null_action();
   j["command"]     = to_string(cmd);
   auto nb          = nlohmann::ordered_json::array();
   for(std::size_t i = 0; i < r.nearest.size() && i < 5; ++i)
      nb.push_back({{"label", r.nearest[i].label}, {"distance", r.nearest[i].distance}});
   j["neighbors"] = std::move(nb);
   nlohmann::ordered_json votes = nlohmann::ordered_json::object();
   for(const auto& [label, n] : r.votes) votes[label] = n;
   j["votes"]      = std::move(votes);
   j["elapsed_ms"] = r.elapsed_ms;
   return j;
}
} // namespace

StreamSummary run_stream_classifier(std::istream& in, std::ostream& out, const TrainedPipeline& pipeline,
                                    StreamInput input)
{
   const StreamConfig& cfg = pipeline.config.stream;
   BoundedQueue<Skeleton3D> queue(cfg.queue_capacity);
   std::exception_ptr reader_error;
   std::size_t read_frames = 0;

   std::thread reader([&] {
      try {
         if(input == StreamInput::RawFrames) {
            RawFrameReader raw(in);
            RawFrame f;
            while(raw.next(f)) {
               queue.push(lift_frame(f, pipeline.config.lift));
               ++read_frames;
            }
         } else {
            std::string line;
            while(std::getline(in, line)) {
               if(line.find_first_not_of(" \t\r") == std::string::npos) continue;
               if(line.find("\"type\"") != std::string::npos && line.find("\"sequence\"") != std::string::npos)
                  continue; // metadata record
               queue.push(frame_from_json_line(line));
               ++read_frames;
            }
         }
      } catch(...) {
         reader_error = std::current_exception();
      }
      queue.close();
   });

   StreamSummary summary;
   Segmenter segmenter(cfg);
   CommandDispatcher dispatcher(pipeline.config.command_map(), pipeline.config.uav.debounce_s);

   auto emit = [&](const PoseSequence& seg) {
      try {
         const auto r   = pipeline.classify(seg);
         const auto cmd = dispatcher.dispatch(r, seg.frames.back().timestamp);
         out << segment_record(summary.segments, seg, r, cmd).dump() << '\n';
         out.flush();
         ++summary.segments;
      } catch(const Error& e) {
         if(e.kind() != ErrorKind::Validation && e.kind() != ErrorKind::EmptySequence) throw;
         log_warning("segment skipped: " + std::string(e.what()));
         ++summary.skipped;
      }
   };

   try {
      while(auto frame = queue.pop())
         if(auto seg = segmenter.push(*frame)) emit(*seg);
      if(auto seg = segmenter.flush()) emit(*seg);
   } catch(...) {
      queue.close();
      reader.join();
      throw;
   }
   reader.join();
   if(reader_error) std::rethrow_exception(reader_error);

   summary.frames  = read_frames;
   summary.dropped = queue.dropped();
   summary.skipped += segmenter.skipped();
   return summary;
}

} // namespace har
