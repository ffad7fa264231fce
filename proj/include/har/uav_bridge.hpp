#pragma once

#include "har/classifier.hpp"
#include "har/skeleton.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace har
{
enum class CommandKind
{
   Null,
   Takeoff,
   Land,
   Hover,
   MoveDirectional,
};

struct Command
{
   CommandKind kind = CommandKind::Null;
   Vec3 direction   = Vec3::Zero(); // body frame: x forward, y left, z up; unit for MoveDirectional

   static Command move(const Vec3& dir) { return {CommandKind::MoveDirectional, dir.normalized()}; }
   bool operator==(const Command& o) const noexcept { return kind == o.kind && direction == o.direction; }
};

std::string to_string(const Command& cmd);
Command command_from_string(const std::string& text);

// Total mapping: unmapped labels resolve to Null.
class ActionCommandMap
{
 public:
   // The six field-trial gestures: a1, a6, a7, a9, a24 and the lunge label.
   static ActionCommandMap defaults(const std::string& lunge_label = "a27");

   void set(const std::string& label, Command cmd) { table_[label] = cmd; }
   Command lookup(const std::string& label) const;
   const std::map<std::string, Command>& table() const noexcept { return table_; }

 private:
   std::map<std::string, Command> table_;
};

// Maps results to commands; repeats of a command inside the debounce window
// are suppressed to Null.
class CommandDispatcher
{
 public:
   explicit CommandDispatcher(ActionCommandMap map, double debounce_s = 2.0);

   Command dispatch(const ClassificationResult& result, double t);

 private:
   ActionCommandMap map_;
   double debounce_s_;
   std::optional<Command> last_;
   double last_t_ = 0.0;
};

struct UavConfig
{
   double set_distance     = 6.0; // d_set, m
   double yaw_gain         = 1.5; // 1/s
   double distance_gain    = 0.8; // 1/s
   double max_yaw_rate     = 1.0; // rad/s
   double max_velocity     = 2.0; // m/s
   double dt               = 1.0 / 30.0;
   double debounce_s       = 2.0;
   bool range_feedforward  = true; // add the human's radial velocity to the distance loop
   std::size_t queue_capacity = 16;

   void validate() const;
};

struct SimState
{
   double uav_x   = 0.0;
   double uav_y   = 0.0;
   double uav_yaw = 0.0;
   double human_x = 6.0;
   double human_y = 0.0;
   double human_vx = 0.0; // used only by the range feed-forward
   double human_vy = 0.0;
   double t        = 0.0;
};

struct TrackStep
{
   double yaw_rate         = 0.0;
   double forward_velocity = 0.0;
   double bearing_error    = 0.0; // before the step
   double range            = 0.0;
   SimState state;                // after one explicit Euler step
};

double wrap_angle(double a) noexcept;
double bearing_error(const SimState& s) noexcept;
double range_to_human(const SimState& s) noexcept;

// Throws CoincidentPositions when the human sits on the UAV.
TrackStep track_step(const SimState& state, const UavConfig& cfg);

struct ScriptEvent
{
   double t = 0.0;
   double human_x = 0.0;
   double human_y = 0.0;
   std::optional<std::string> label; // "null" injects a NullAction
};

struct SimLogRow
{
   double t;
   SimState state;
   double bearing_error;
   double range;
   double yaw_rate;
   double forward_velocity;
   Command command;
};

std::vector<ScriptEvent> read_scenario(std::istream& in);
std::vector<ScriptEvent> load_scenario(const std::filesystem::path& path);

// Steps the simulator until max(duration_s, last script time). Human
// positions are interpolated linearly between script rows; label events
// pass through a bounded queue to the dispatcher. Throws ScriptOrderError.
std::vector<SimLogRow> run_scenario(const std::vector<ScriptEvent>& script, SimState initial, const UavConfig& cfg,
                                    const ActionCommandMap& map, double duration_s = 0.0);

void write_sim_log(std::ostream& out, const std::vector<SimLogRow>& log);

} // namespace har
