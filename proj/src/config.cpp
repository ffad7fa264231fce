#include "har/config.hpp"

#include "har/errors.hpp"

#include <algorithm>
#include <climits>
#include <fstream>
#include <sstream>

namespace har
{
namespace
{
std::string trim(const std::string& s)
{
   const auto b = s.find_first_not_of(" \t\r\n");
   if(b == std::string::npos) return {};
   const auto e = s.find_last_not_of(" \t\r\n");
   return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep)
{
   std::vector<std::string> out;
   std::stringstream ss(s);
   std::string item;
   while(std::getline(ss, item, sep)) {
      item = trim(item);
      if(!item.empty()) out.push_back(item);
   }
   return out;
}

double parse_double(const std::string& key, const std::string& v)
{
   std::size_t used = 0;
   double d         = 0.0;
   try {
      d = std::stod(v, &used);
   } catch(const std::exception&) {
      used = 0;
   }
   if(used != v.size() || v.empty()) fail(ErrorKind::Config, key + ": expected a number, got '" + v + "'");
   return d;
}

long long parse_int(const std::string& key, const std::string& v)
{
   std::size_t used = 0;
   long long i      = 0;
   try {
      i = std::stoll(v, &used);
   } catch(const std::exception&) {
      used = 0;
   }
   if(used != v.size() || v.empty()) fail(ErrorKind::Config, key + ": expected an integer, got '" + v + "'");
   return i;
}

int parse_positive_int(const std::string& key, const std::string& v)
{
   const auto i = parse_int(key, v);
   if(i <= 0 || i > INT_MAX) fail(ErrorKind::Config, key + ": expected a positive integer");
   return static_cast<int>(i);
}

bool parse_bool(const std::string& key, const std::string& v)
{
   if(v == "true" || v == "on" || v == "1" || v == "yes") return true;
   if(v == "false" || v == "off" || v == "0" || v == "no") return false;
   fail(ErrorKind::Config, key + ": expected a boolean, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v)
{
   std::vector<int> out;
   for(const auto& item : split_list(v, ',')) out.push_back(parse_positive_int(key, item));
   return out;
}

LandmarkId parse_landmark(const std::string& key, const std::string& name)
{
   const auto id = landmark_from_name(name);
   if(!id) fail(ErrorKind::Config, key + ": unknown landmark '" + name + "'");
   return *id;
}

std::string fmt(double d)
{
   return nlohmann::json(d).dump(); // shortest round-trip form
}

std::string join_ints(const std::vector<int>& v)
{
   std::string s;
   for(std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
   return s;
}

std::string pairs_string(const EmbeddingConfig& e)
{
   if(e.pairs == EmbeddingConfig::all_pairs()) return "all";
   std::string s;
   for(const auto& [a, b] : e.pairs)
      s += (s.empty() ? "" : ";") + std::string(landmark_name(a)) + "-" + std::string(landmark_name(b));
   return s;
}

std::string triples_string(const EmbeddingConfig& e)
{
   if(e.triples == EmbeddingConfig::default_triples()) return "default";
   std::string s;
   for(const auto& t : e.triples)
      s += (s.empty() ? "" : ";") + std::string(landmark_name(t[0])) + "-" + std::string(landmark_name(t[1])) + "-"
           + std::string(landmark_name(t[2]));
   return s;
}

} // namespace

void StreamConfig::validate() const
{
   if(!(idle_gap_s > 0.0) || !(motion_threshold >= 0.0) || queue_capacity == 0 || min_frames < 2)
      fail(ErrorKind::Config, "invalid stream settings");
}

std::string to_string(PipelineMode mode)
{
   return mode == PipelineMode::Heavy ? "heavy" : "encoded";
}

PipelineConfig PipelineConfig::preset(PipelineMode mode)
{
   PipelineConfig c;
   c.set("mode", to_string(mode));
   return c;
}

PipelineConfig PipelineConfig::preset(const std::string& name)
{
   PipelineConfig c;
   c.set("mode", name);
   return c;
}

void PipelineConfig::set(const std::string& raw_key, const std::string& raw_value)
{
   const std::string key = trim(raw_key);
   const std::string v   = trim(raw_value);

   if(key == "mode") {
      if(v == "heavy") {
         mode                 = PipelineMode::Heavy;
         classifier.shortlist = INT_MAX;
         classifier.band      = 1.0;
      } else if(v == "encoded") {
         mode                 = PipelineMode::Encoded;
         classifier.shortlist = 30;
         classifier.band      = 0.2;
      } else {
         fail(ErrorKind::Config, "mode must be 'heavy' or 'encoded'");
      }
   } else if(key == "seed") {
      const auto s = parse_int(key, v);
      if(s < 0) fail(ErrorKind::Config, "seed must be >= 0");
      seed = static_cast<std::uint64_t>(s);
   } else if(key == "split.test_ratio") test_ratio = parse_double(key, v);
   else if(key == "lift.target_area_mm") lift.target_area_mm = parse_double(key, v);
   else if(key == "lift.min_window_px") lift.min_window_px = parse_positive_int(key, v);
   else if(key == "lift.background_margin_m") lift.background_margin_m = parse_double(key, v);
   else if(key == "lift.quartile") lift.quartile = parse_double(key, v);
   else if(key == "normalize.torso_multiplier") normalize.torso_multiplier = parse_double(key, v);
   else if(key == "normalize.orient") normalize.orient = parse_bool(key, v);
   else if(key == "normalize.target_direction") {
      const auto parts = split_list(v, ',');
      if(parts.size() != 3) fail(ErrorKind::Config, key + ": expected x,y,z");
      normalize.target_direction = Vec3(parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2]));
   } else if(key == "embedding.singles") embedding.use_singles = parse_bool(key, v);
   else if(key == "embedding.pair_features") embedding.use_pairs = parse_bool(key, v);
   else if(key == "embedding.triple_features") embedding.use_triples = parse_bool(key, v);
   else if(key == "embedding.pairs") {
      if(v == "all") embedding.pairs = EmbeddingConfig::all_pairs();
      else {
         embedding.pairs.clear();
         for(const auto& item : split_list(v, ';')) {
            const auto names = split_list(item, '-');
            if(names.size() != 2) fail(ErrorKind::Config, key + ": pairs look like LShoulder-LWrist");
            embedding.pairs.emplace_back(parse_landmark(key, names[0]), parse_landmark(key, names[1]));
         }
      }
   } else if(key == "embedding.triples") {
      if(v == "default") embedding.triples = EmbeddingConfig::default_triples();
      else {
         embedding.triples.clear();
         for(const auto& item : split_list(v, ';')) {
            const auto names = split_list(item, '-');
            if(names.size() != 3) fail(ErrorKind::Config, key + ": triples look like LShoulder-LElbow-LWrist");
            embedding.triples.push_back(
                {parse_landmark(key, names[0]), parse_landmark(key, names[1]), parse_landmark(key, names[2])});
         }
      }
   } else if(key == "codec.hidden") codec.hidden = parse_int_list(key, v);
   else if(key == "codec.latent") codec.latent_dim = parse_positive_int(key, v);
   else if(key == "codec.learning_rate") codec.learning_rate = parse_double(key, v);
   else if(key == "codec.epochs") codec.epochs = parse_positive_int(key, v);
   else if(key == "codec.batch_size") codec.batch_size = parse_positive_int(key, v);
   else if(key == "codec.patience") codec.patience = parse_positive_int(key, v);
   else if(key == "codec.validation_fraction") codec.validation_fraction = parse_double(key, v);
   else if(key == "classifier.k") classifier.k = parse_positive_int(key, v);
   else if(key == "classifier.shortlist") classifier.shortlist = v == "all" ? INT_MAX : parse_positive_int(key, v);
   else if(key == "classifier.band") classifier.band = parse_double(key, v);
   else if(key == "classifier.reject_threshold") {
      calibrate_reject = false;
      if(v == "none" || v == "off") classifier.reject_threshold.reset();
      else if(v == "auto") {
         classifier.reject_threshold.reset();
         calibrate_reject = true;
      } else classifier.reject_threshold = parse_double(key, v);
   } else if(key == "classifier.reject_percentile") reject_percentile = parse_double(key, v);
   else if(key == "classifier.vote_over_shortlist") classifier.vote_over_shortlist = parse_bool(key, v);
   else if(key == "classifier.threads") classifier.threads = parse_positive_int(key, v);
   else if(key == "classifier.k_candidates") k_candidates = parse_int_list(key, v);
   else if(key == "classifier.cv_folds") cv_folds = parse_positive_int(key, v);
   else if(key == "stream.idle_gap_s") stream.idle_gap_s = parse_double(key, v);
   else if(key == "stream.motion_threshold") stream.motion_threshold = parse_double(key, v);
   else if(key == "stream.queue_capacity") stream.queue_capacity = static_cast<std::size_t>(parse_positive_int(key, v));
   else if(key == "stream.min_frames") stream.min_frames = static_cast<std::size_t>(parse_positive_int(key, v));
   else if(key == "uav.set_distance") uav.set_distance = parse_double(key, v);
   else if(key == "uav.yaw_gain") uav.yaw_gain = parse_double(key, v);
   else if(key == "uav.distance_gain") uav.distance_gain = parse_double(key, v);
   else if(key == "uav.max_yaw_rate") uav.max_yaw_rate = parse_double(key, v);
   else if(key == "uav.max_velocity") uav.max_velocity = parse_double(key, v);
   else if(key == "uav.dt") uav.dt = parse_double(key, v);
   else if(key == "uav.debounce_s") uav.debounce_s = parse_double(key, v);
   else if(key == "uav.range_feedforward") uav.range_feedforward = parse_bool(key, v);
   else if(key == "uav.lunge_label") lunge_label = v;
   else if(key.rfind("uav.map.", 0) == 0 && key.size() > 8) {
      command_from_string(v); // validate
      command_overrides[key.substr(8)] = v;
   } else fail(ErrorKind::Config, "unknown config key '" + key + "'");
}

void PipelineConfig::apply_text(const std::string& text, const std::string& origin)
{
   std::istringstream in(text);
   std::string line;
   std::size_t line_no = 0;
   while(std::getline(in, line)) {
      ++line_no;
      if(const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if(trim(line).empty()) continue;
      const auto eq = line.find('=');
      if(eq == std::string::npos)
         fail(ErrorKind::Config, origin + ":" + std::to_string(line_no) + ": expected key = value");
      try {
         set(line.substr(0, eq), line.substr(eq + 1));
      } catch(const Error& e) {
         fail(ErrorKind::Config, origin + ":" + std::to_string(line_no) + ": " + e.what());
      }
   }
}

void PipelineConfig::apply_file(const std::filesystem::path& path)
{
   std::ifstream in(path);
   if(!in) fail(ErrorKind::Io, "cannot open config " + path.string());
   std::stringstream ss;
   ss << in.rdbuf();
   apply_text(ss.str(), path.string());
}

void PipelineConfig::validate() const
{
   if(!(test_ratio > 0.0 && test_ratio < 1.0)) fail(ErrorKind::Config, "split.test_ratio must lie in (0, 1)");
   lift.validate();
   normalize.validate();
   embedding.validate();
   codec.validate();
   classifier.validate();
   stream.validate();
   uav.validate();
   if(!(reject_percentile > 0.0 && reject_percentile <= 1.0))
      fail(ErrorKind::Config, "classifier.reject_percentile must lie in (0, 1]");
   if(!k_candidates.empty() && cv_folds < 2) fail(ErrorKind::Config, "classifier.cv_folds must be >= 2");
}

ActionCommandMap PipelineConfig::command_map() const
{
   auto m = ActionCommandMap::defaults(lunge_label);
   for(const auto& [label, cmd] : command_overrides) m.set(label, command_from_string(cmd));
   return m;
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const
{
   std::vector<std::pair<std::string, std::string>> e;
   auto b = [](bool v) { return std::string(v ? "true" : "false"); };
   e.emplace_back("mode", to_string(mode));
   e.emplace_back("seed", std::to_string(seed));
   e.emplace_back("split.test_ratio", fmt(test_ratio));
   e.emplace_back("lift.target_area_mm", fmt(lift.target_area_mm));
   e.emplace_back("lift.min_window_px", std::to_string(lift.min_window_px));
   e.emplace_back("lift.background_margin_m", fmt(lift.background_margin_m));
   e.emplace_back("lift.quartile", fmt(lift.quartile));
   e.emplace_back("normalize.torso_multiplier", fmt(normalize.torso_multiplier));
   e.emplace_back("normalize.orient", b(normalize.orient));
   e.emplace_back("normalize.target_direction", fmt(normalize.target_direction.x()) + "," + fmt(normalize.target_direction.y()) + ","
                                                    + fmt(normalize.target_direction.z()));
   e.emplace_back("embedding.singles", b(embedding.use_singles));
   e.emplace_back("embedding.pair_features", b(embedding.use_pairs));
   e.emplace_back("embedding.triple_features", b(embedding.use_triples));
   e.emplace_back("embedding.pairs", pairs_string(embedding));
   e.emplace_back("embedding.triples", triples_string(embedding));
   e.emplace_back("codec.hidden", join_ints(codec.hidden));
   e.emplace_back("codec.latent", std::to_string(codec.latent_dim));
   e.emplace_back("codec.learning_rate", fmt(codec.learning_rate));
   e.emplace_back("codec.epochs", std::to_string(codec.epochs));
   e.emplace_back("codec.batch_size", std::to_string(codec.batch_size));
   e.emplace_back("codec.patience", std::to_string(codec.patience));
   e.emplace_back("codec.validation_fraction", fmt(codec.validation_fraction));
   e.emplace_back("classifier.k", std::to_string(classifier.k));
   e.emplace_back("classifier.shortlist", classifier.shortlist == INT_MAX ? "all" : std::to_string(classifier.shortlist));
   e.emplace_back("classifier.band", fmt(classifier.band));
   e.emplace_back("classifier.reject_threshold",
                  calibrate_reject ? "auto" : classifier.reject_threshold ? fmt(*classifier.reject_threshold) : "none");
   e.emplace_back("classifier.reject_percentile", fmt(reject_percentile));
   e.emplace_back("classifier.vote_over_shortlist", b(classifier.vote_over_shortlist));
   e.emplace_back("classifier.threads", std::to_string(classifier.threads));
   e.emplace_back("classifier.k_candidates", join_ints(k_candidates));
   e.emplace_back("classifier.cv_folds", std::to_string(cv_folds));
   e.emplace_back("stream.idle_gap_s", fmt(stream.idle_gap_s));
   e.emplace_back("stream.motion_threshold", fmt(stream.motion_threshold));
   e.emplace_back("stream.queue_capacity", std::to_string(stream.queue_capacity));
   e.emplace_back("stream.min_frames", std::to_string(stream.min_frames));
   e.emplace_back("uav.set_distance", fmt(uav.set_distance));
   e.emplace_back("uav.yaw_gain", fmt(uav.yaw_gain));
   e.emplace_back("uav.distance_gain", fmt(uav.distance_gain));
   e.emplace_back("uav.max_yaw_rate", fmt(uav.max_yaw_rate));
   e.emplace_back("uav.max_velocity", fmt(uav.max_velocity));
   e.emplace_back("uav.dt", fmt(uav.dt));
   e.emplace_back("uav.debounce_s", fmt(uav.debounce_s));
   e.emplace_back("uav.range_feedforward", b(uav.range_feedforward));
   e.emplace_back("uav.lunge_label", lunge_label);
   for(const auto& [label, cmd] : command_overrides) e.emplace_back("uav.map." + label, cmd);
   return e;
}

nlohmann::ordered_json PipelineConfig::to_json() const
{
   nlohmann::ordered_json j = nlohmann::ordered_json::object();
   for(const auto& [k, v] : entries()) j[k] = v;
   return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j)
{
   PipelineConfig c;
   if(!j.is_object()) fail(ErrorKind::Parse, "config snapshot must be an object");
   // mode first: it resets the classifier preset
   if(auto m = j.find("mode"); m != j.end()) c.set("mode", m->get<std::string>());
   for(const auto& [k, v] : j.items())
      if(k != "mode") {
         if(!v.is_string()) fail(ErrorKind::Parse, "config snapshot values must be strings");
         if(k == "classifier.k_candidates" && v.get<std::string>().empty()) {
            c.k_candidates.clear();
            continue;
         }
         c.set(k, v.get<std::string>());
      }
   return c;
}

} // namespace har
