#include "har/uav_bridge.hpp"

#include "har/bounded_queue.hpp"
#include "har/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace har
{
// -- Commands ---------------------------------------------------------------------

namespace
{
const std::array<std::pair<const char*, Vec3>, 6> k_named_moves = {{
    {"forward", Vec3::UnitX()},
    {"back", -Vec3::UnitX()},
    {"left", Vec3::UnitY()},
    {"right", -Vec3::UnitY()},
    {"up", Vec3::UnitZ()},
    {"down", -Vec3::UnitZ()},
}};
} // namespace

std::string to_string(const Command& cmd)
{
   switch(cmd.kind) {
   case CommandKind::Null: return "null";
   case CommandKind::Takeoff: return "takeoff";
   case CommandKind::Land: return "land";
   case CommandKind::Hover: return "hover";
   case CommandKind::MoveDirectional: {
      for(const auto& [name, dir] : k_named_moves)
         if((cmd.direction - dir).norm() < 1e-12) return name;
      std::ostringstream s;
      s.precision(6);
      s << "move(" << cmd.direction.x() << ' ' << cmd.direction.y() << ' ' << cmd.direction.z() << ')';
      return s.str();
   }
   }
   return "null";
}

// null, takeoff, land, hover, forward/back/left/right/up/down, or move(x y z)
Command command_from_string(const std::string& text)
{
   std::string t = text;
   std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
   if(t == "null") return {};
   if(t == "takeoff") return {CommandKind::Takeoff, Vec3::Zero()};
   if(t == "land") return {CommandKind::Land, Vec3::Zero()};
   if(t == "hover") return {CommandKind::Hover, Vec3::Zero()};
   for(const auto& [name, dir] : k_named_moves)
      if(t == name) return Command::move(dir);
   if(t.rfind("move(", 0) == 0 && t.back() == ')') {
      std::string body = t.substr(5, t.size() - 6);
      std::replace(body.begin(), body.end(), ',', ' ');
      std::istringstream in(body);
      Vec3 d;
      if(in >> d.x() >> d.y() >> d.z() && d.allFinite() && d.norm() > 0.0) {
         std::string rest;
         if(!(in >> rest)) return Command::move(d);
      }
   }
   fail(ErrorKind::Config, "unknown command '" + text + "'");
}

ActionCommandMap ActionCommandMap::defaults(const std::string& lunge_label)
{
   ActionCommandMap m;
   m.set("a1", Command::move(Vec3::UnitY()));  // swipe left
   m.set("a6", {CommandKind::Land, Vec3::Zero()}); // cross arms
   m.set("a7", Command::move(Vec3::UnitZ()));  // basketball shoot
   m.set("a9", {CommandKind::Hover, Vec3::Zero()}); // draw circle
   m.set("a24", {CommandKind::Takeoff, Vec3::Zero()}); // sit to stand
   m.set(lunge_label, Command::move(Vec3::UnitX()));
   return m;
}

Command ActionCommandMap::lookup(const std::string& label) const
{
   const auto it = table_.find(label);
   return it == table_.end() ? Command{} : it->second;
}

CommandDispatcher::CommandDispatcher(ActionCommandMap map, double debounce_s)
    : map_(std::move(map))
    , debounce_s_(debounce_s)
{}

Command CommandDispatcher::dispatch(const ClassificationResult& result, double t)
{
   if(result.null_action()) return {};
   const Command cmd = map_.lookup(*result.label);
   if(cmd.kind == CommandKind::Null) return cmd;
   if(last_ && *last_ == cmd && t - last_t_ < debounce_s_) return {};
   last_   = cmd;
   last_t_ = t;
   return cmd;
}

// -- Tracking ---------------------------------------------------------------------

void UavConfig::validate() const
{
   if(!(set_distance > 0.0)) fail(ErrorKind::Config, "set distance must be positive");
   if(!(max_yaw_rate > 0.0) || !(max_velocity > 0.0)) fail(ErrorKind::Config, "limits must be positive");
   if(!(dt > 0.0)) fail(ErrorKind::Config, "timestep must be positive");
   if(yaw_gain < 0.0 || distance_gain < 0.0 || debounce_s < 0.0) fail(ErrorKind::Config, "gains must be >= 0");
}

double wrap_angle(double a) noexcept
{
   a = std::remainder(a, 2.0 * std::numbers::pi);
   return a;
}

double bearing_error(const SimState& s) noexcept
{
   return wrap_angle(std::atan2(s.human_y - s.uav_y, s.human_x - s.uav_x) - s.uav_yaw);
}

double range_to_human(const SimState& s) noexcept
{
   return std::hypot(s.human_x - s.uav_x, s.human_y - s.uav_y);
}

TrackStep track_step(const SimState& state, const UavConfig& cfg)
{
   TrackStep out;
   out.range = range_to_human(state);
   if(out.range < 1e-9) fail(ErrorKind::CoincidentPositions, "human and UAV positions coincide");
   out.bearing_error = bearing_error(state);

   double v_cmd = cfg.distance_gain * (out.range - cfg.set_distance);
   if(cfg.range_feedforward) {
      const double ux = (state.human_x - state.uav_x) / out.range;
      const double uy = (state.human_y - state.uav_y) / out.range;
      v_cmd += state.human_vx * ux + state.human_vy * uy;
   }
   out.yaw_rate         = std::clamp(cfg.yaw_gain * out.bearing_error, -cfg.max_yaw_rate, cfg.max_yaw_rate);
   out.forward_velocity = std::clamp(v_cmd, -cfg.max_velocity, cfg.max_velocity);

   out.state = state;
   out.state.uav_x += out.forward_velocity * std::cos(state.uav_yaw) * cfg.dt;
   out.state.uav_y += out.forward_velocity * std::sin(state.uav_yaw) * cfg.dt;
   out.state.uav_yaw = wrap_angle(state.uav_yaw + out.yaw_rate * cfg.dt);
   out.state.human_x += state.human_vx * cfg.dt;
   out.state.human_y += state.human_vy * cfg.dt;
   out.state.t += cfg.dt;
   return out;
}

// -- Scenarios --------------------------------------------------------------------

std::vector<ScriptEvent> read_scenario(std::istream& in)
{
   std::vector<ScriptEvent> script;
   std::string line;
   std::size_t line_no = 0;
   while(std::getline(in, line)) {
      ++line_no;
      if(!line.empty() && line.back() == '\r') line.pop_back();
      if(line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string cell;
      while(std::getline(ss, cell, ',')) f.push_back(cell);
      if(line.back() == ',') f.emplace_back();
      if(f.size() == 4 || f.size() == 3) {
         if(f[0] == "t") continue; // header
         ScriptEvent e;
         try {
            e.t       = std::stod(f[0]);
            e.human_x = std::stod(f[1]);
            e.human_y = std::stod(f[2]);
         } catch(const std::exception&) {
            fail(ErrorKind::Parse, "scenario line " + std::to_string(line_no) + ": bad number");
         }
         if(f.size() == 4 && !f[3].empty()) e.label = f[3];
         script.push_back(std::move(e));
      } else {
         fail(ErrorKind::Parse, "scenario line " + std::to_string(line_no) + ": expected t,human_x,human_y[,label]");
      }
   }
   return script;
}

std::vector<ScriptEvent> load_scenario(const std::filesystem::path& path)
{
   std::ifstream in(path);
   if(!in) fail(ErrorKind::Io, "cannot open " + path.string());
   return read_scenario(in);
}

std::vector<SimLogRow> run_scenario(const std::vector<ScriptEvent>& script, SimState initial, const UavConfig& cfg,
                                    const ActionCommandMap& map, double duration_s)
{
   cfg.validate();
   for(std::size_t i = 1; i < script.size(); ++i)
      if(!(script[i].t > script[i - 1].t)) fail(ErrorKind::ScriptOrder, "scenario times must increase");
   if(!script.empty() && script.front().t < 0.0) fail(ErrorKind::ScriptOrder, "scenario times must be >= 0");

   const double end = std::max(duration_s, script.empty() ? 0.0 : script.back().t);
   const auto ticks = static_cast<std::size_t>(std::floor(end / cfg.dt + 1e-9)) + 1;

   BoundedQueue<ClassificationResult> results(cfg.queue_capacity);
   CommandDispatcher dispatcher(map, cfg.debounce_s);
   std::size_t next_event = 0;
   const double hx0 = initial.human_x, hy0 = initial.human_y;

   auto human_at = [&](double t, SimState& s) {
      s.human_vx = s.human_vy = 0.0;
      if(script.empty() || t < script.front().t) {
         if(script.empty()) {
            s.human_x = hx0;
            s.human_y = hy0;
         }
         return;
      }
      std::size_t seg = 0;
      while(seg + 1 < script.size() && script[seg + 1].t <= t) ++seg;
      const auto& a = script[seg];
      if(seg + 1 == script.size()) {
         s.human_x = a.human_x;
         s.human_y = a.human_y;
         return;
      }
      const auto& b   = script[seg + 1];
      const double dt = b.t - a.t;
      s.human_vx      = (b.human_x - a.human_x) / dt;
      s.human_vy      = (b.human_y - a.human_y) / dt;
      s.human_x       = a.human_x + s.human_vx * (t - a.t);
      s.human_y       = a.human_y + s.human_vy * (t - a.t);
   };

   std::vector<SimLogRow> log;
   log.reserve(ticks);
   SimState state = initial;
   for(std::size_t tick = 0; tick < ticks; ++tick) {
      const double t = static_cast<double>(tick) * cfg.dt;
      state.t        = t;
      human_at(t, state);

      // classifier side: publish results whose time has come
      while(next_event < script.size() && script[next_event].t <= t + 1e-9) {
         const auto& ev = script[next_event++];
         if(!ev.label) continue;
         ClassificationResult r;
         if(*ev.label != "null" && *ev.label != "NullAction") r.label = *ev.label;
         results.push(std::move(r));
      }
      Command cmd;
      if(auto r = results.try_pop()) cmd = dispatcher.dispatch(*r, t);

      const TrackStep step = track_step(state, cfg);
      log.push_back({t, state, step.bearing_error, step.range, step.yaw_rate, step.forward_velocity, cmd});
      state = step.state;
   }
   return log;
}

void write_sim_log(std::ostream& out, const std::vector<SimLogRow>& log)
{
   out << "t,uav_x,uav_y,uav_yaw,human_x,human_y,beta,range,yaw_rate,forward_velocity,command\n";
   out.precision(9);
   for(const auto& r : log)
      out << r.t << ',' << r.state.uav_x << ',' << r.state.uav_y << ',' << r.state.uav_yaw << ',' << r.state.human_x
          << ',' << r.state.human_y << ',' << r.bearing_error << ',' << r.range << ',' << r.yaw_rate << ','
          << r.forward_velocity << ',' << to_string(r.command) << '\n';
}

} // namespace har
