#include "har/skeleton_io.hpp"

#include "har/errors.hpp"
#include "har/mat_file.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <regex>
#include <set>
#include <sstream>

namespace har
{
namespace
{
using json         = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr double k_default_rate_hz = 30.0;

constexpr std::array<std::string_view, k_landmark_count> k_landmark_names = {
    "Nose", "LShoulder", "RShoulder", "LElbow", "RElbow", "LWrist", "RWrist",
    "LHip", "RHip",      "LKnee",     "RKnee",  "LHeel",  "RHeel",
};

double number_at(const json& j, const char* what)
{
   if(!j.is_number()) fail(ErrorKind::Parse, std::string("expected number for ") + what);
   return j.get<double>();
}

} // namespace

// -- Skeleton ----------------------------------------------------------------

std::string_view landmark_name(LandmarkId id) noexcept
{
   return k_landmark_names[index(id)];
}

std::optional<LandmarkId> landmark_from_name(std::string_view name) noexcept
{
   for(std::size_t i = 0; i < k_landmark_count; ++i)
      if(k_landmark_names[i] == name) return static_cast<LandmarkId>(i);
   return std::nullopt;
}

Skeleton3D::Skeleton3D()
{
   points.fill(Vec3::Zero());
   visibility.fill(1.0);
}

Vec3 Skeleton3D::hip_center() const noexcept
{
   return 0.5 * ((*this)[LandmarkId::LHip] + (*this)[LandmarkId::RHip]);
}

Vec3 Skeleton3D::shoulder_center() const noexcept
{
   return 0.5 * ((*this)[LandmarkId::LShoulder] + (*this)[LandmarkId::RShoulder]);
}

bool Skeleton3D::is_finite() const noexcept
{
   return std::isfinite(timestamp)
          && std::all_of(points.begin(), points.end(), [](const Vec3& p) { return p.allFinite(); });
}

void validate(const PoseSequence& seq)
{
   for(std::size_t f = 0; f < seq.frames.size(); ++f) {
      const auto& fr = seq.frames[f];
      if(!fr.is_finite())
         fail(ErrorKind::Validation, "frame " + std::to_string(f) + " has a non-finite value");
      if(fr.timestamp < 0.0) fail(ErrorKind::Validation, "frame " + std::to_string(f) + " has negative timestamp");
      for(double v : fr.visibility)
         if(!(v >= 0.0 && v <= 1.0))
            fail(ErrorKind::Validation, "frame " + std::to_string(f) + " visibility outside [0,1]");
      if(f > 0 && !(fr.timestamp > seq.frames[f - 1].timestamp))
         fail(ErrorKind::Validation, "timestamps not strictly increasing at frame " + std::to_string(f));
   }
}

// -- Neutral NDJSON ----------------------------------------------------------

SequenceFormat format_from_string(std::string_view name)
{
   if(name == "neutral-ndjson" || name == "neutral") return SequenceFormat::NeutralNdjson;
   if(name == "mhad-skeleton" || name == "mhad") return SequenceFormat::MhadSkeleton;
   fail(ErrorKind::Config, "unknown sequence format '" + std::string(name) + "'");
}

std::string frame_to_json_line(const Skeleton3D& frame)
{
   ordered_json j;
   j["t"]   = frame.timestamp;
   auto pts = ordered_json::array();
   for(const auto& p : frame.points) pts.push_back({p.x(), p.y(), p.z()});
   j["pts"] = std::move(pts);
   j["vis"] = frame.visibility;
   return j.dump();
}

namespace
{
Skeleton3D frame_from_json(const json& j, std::size_t frame_index)
{
   Skeleton3D fr;
   if(auto it = j.find("t"); it != j.end()) fr.timestamp = number_at(*it, "t");
   else fr.timestamp = static_cast<double>(frame_index) / k_default_rate_hz;

   const auto pts = j.find("pts");
   if(pts == j.end() || !pts->is_array() || pts->size() != k_landmark_count)
      fail(ErrorKind::Parse, "frame needs 'pts' with 13 points");
   for(std::size_t i = 0; i < k_landmark_count; ++i) {
      const auto& p = (*pts)[i];
      if(!p.is_array() || p.size() != 3) fail(ErrorKind::Parse, "point must be [x,y,z]");
      fr.points[i] = Vec3(number_at(p[0], "x"), number_at(p[1], "y"), number_at(p[2], "z"));
   }
   if(auto vis = j.find("vis"); vis != j.end()) {
      if(!vis->is_array() || vis->size() != k_landmark_count)
         fail(ErrorKind::Parse, "'vis' must hold 13 values");
      for(std::size_t i = 0; i < k_landmark_count; ++i) fr.visibility[i] = number_at((*vis)[i], "vis");
   }
   return fr;
}

json parse_line(std::string_view line)
{
   json j = json::parse(line.begin(), line.end(), nullptr, false);
   if(j.is_discarded() || !j.is_object()) fail(ErrorKind::Parse, "malformed record: " + std::string(line.substr(0, 80)));
   return j;
}

bool blank(const std::string& s)
{
   return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

} // namespace

Skeleton3D frame_from_json_line(std::string_view line)
{
   return frame_from_json(parse_line(line), 0);
}

PoseSequence read_neutral(std::istream& in)
{
   PoseSequence seq;
   std::string line;
   while(std::getline(in, line)) {
      if(blank(line)) continue;
      const json j = parse_line(line);
      if(auto type = j.find("type"); type != j.end() && *type == "sequence") {
         if(auto v = j.find("label"); v != j.end() && v->is_string()) seq.label = v->get<std::string>();
         if(auto v = j.find("subject"); v != j.end() && v->is_string()) seq.subject = v->get<std::string>();
         if(auto v = j.find("trial"); v != j.end() && v->is_string()) seq.trial = v->get<std::string>();
         continue;
      }
      seq.frames.push_back(frame_from_json(j, seq.frames.size()));
   }
   validate(seq);
   return seq;
}

void write_neutral(std::ostream& out, const PoseSequence& seq)
{
   if(seq.label || seq.subject || seq.trial) {
      ordered_json meta;
      meta["type"] = "sequence";
      if(seq.label) meta["label"] = *seq.label;
      if(seq.subject) meta["subject"] = *seq.subject;
      if(seq.trial) meta["trial"] = *seq.trial;
      out << meta.dump() << '\n';
   }
   for(const auto& fr : seq.frames) out << frame_to_json_line(fr) << '\n';
}

PoseSequence load_sequence(const std::filesystem::path& path, SequenceFormat format)
{
   if(format == SequenceFormat::MhadSkeleton) return load_mhad(path);
   std::ifstream in(path);
   if(!in) fail(ErrorKind::Io, "cannot open " + path.string());
   return read_neutral(in);
}

void save_sequence(const std::filesystem::path& path, const PoseSequence& seq)
{
   std::ofstream out(path);
   if(!out) fail(ErrorKind::Io, "cannot write " + path.string());
   write_neutral(out, seq);
   if(!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

// -- UTD-MHAD ----------------------------------------------------------------

const std::array<MhadJoint, k_landmark_count>& mhad_landmark_map() noexcept
{
   // Heels come from the ankles; the foot joints sit at the toe box.
   static constexpr std::array<MhadJoint, k_landmark_count> map = {
       MhadJoint::Head,          MhadJoint::LeftShoulder, MhadJoint::RightShoulder, MhadJoint::LeftElbow,
       MhadJoint::RightElbow,    MhadJoint::LeftWrist,    MhadJoint::RightWrist,    MhadJoint::LeftHip,
       MhadJoint::RightHip,      MhadJoint::LeftKnee,     MhadJoint::RightKnee,     MhadJoint::LeftAnkle,
       MhadJoint::RightAnkle,
   };
   return map;
}

std::array<Vec3, k_landmark_count> convert_mhad_joints(std::span<const Vec3> joints20)
{
   if(joints20.size() != k_mhad_joint_count)
      fail(ErrorKind::Shape, "expected 20 joints, got " + std::to_string(joints20.size()));
   std::array<Vec3, k_landmark_count> out;
   const auto& map = mhad_landmark_map();
   for(std::size_t i = 0; i < k_landmark_count; ++i) out[i] = joints20[static_cast<std::size_t>(map[i])];
   return out;
}

namespace
{
PoseSequence from_joint_frames(const std::vector<std::array<Vec3, k_mhad_joint_count>>& frames)
{
   PoseSequence seq;
   seq.frames.reserve(frames.size());
   for(std::size_t f = 0; f < frames.size(); ++f) {
      Skeleton3D sk;
      sk.timestamp = static_cast<double>(f) / k_default_rate_hz;
      sk.points    = convert_mhad_joints(frames[f]);
      seq.frames.push_back(sk);
   }
   return seq;
}

PoseSequence load_mhad_mat(const std::filesystem::path& path)
{
   const auto arrays = read_mat_file(path);
   const MatArray* skel = nullptr;
   for(const auto& a : arrays)
      if(a.name == "d_skel") skel = &a;
   if(!skel) {
      // fall back to the first 20x3xN array
      for(const auto& a : arrays)
         if(a.dims.size() >= 2 && a.dims[0] == k_mhad_joint_count && a.dims[1] == 3) {
            skel = &a;
            break;
         }
   }
   if(!skel) fail(ErrorKind::Parse, path.string() + ": no 20x3xN skeleton array");
   if(skel->dims.size() < 2 || skel->dims.size() > 3 || skel->dims[0] != k_mhad_joint_count || skel->dims[1] != 3)
      fail(ErrorKind::Shape, path.string() + ": skeleton array must be 20x3xN");
   const std::size_t n = skel->dims.size() == 3 ? skel->dims[2] : 1;

   std::vector<std::array<Vec3, k_mhad_joint_count>> frames(n);
   for(std::size_t f = 0; f < n; ++f)
      for(std::size_t j = 0; j < k_mhad_joint_count; ++j)
         for(std::size_t c = 0; c < 3; ++c)
            frames[f][j][static_cast<Eigen::Index>(c)] = skel->data[j + k_mhad_joint_count * c + 3 * k_mhad_joint_count * f];
   return from_joint_frames(frames);
}

PoseSequence load_mhad_text(const std::filesystem::path& path)
{
   std::ifstream in(path);
   if(!in) fail(ErrorKind::Io, "cannot open " + path.string());
   std::vector<std::array<Vec3, k_mhad_joint_count>> frames;
   std::string line;
   std::size_t line_no = 0;
   while(std::getline(in, line)) {
      ++line_no;
      if(blank(line) || line.front() == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ss(line);
      std::vector<double> values;
      std::string tok;
      while(ss >> tok) {
         std::size_t used = 0;
         double v         = 0.0;
         try {
            v = std::stod(tok, &used);
         } catch(const std::exception&) {
            used = 0;
         }
         if(used != tok.size()) fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": bad number '" + tok + "'");
         values.push_back(v);
      }
      if(values.size() != 3 * k_mhad_joint_count)
         fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": expected 60 values");
      std::array<Vec3, k_mhad_joint_count> fr;
      for(std::size_t j = 0; j < k_mhad_joint_count; ++j) fr[j] = Vec3(values[3 * j], values[3 * j + 1], values[3 * j + 2]);
      frames.push_back(fr);
   }
   return from_joint_frames(frames);
}

} // namespace

PoseSequence load_mhad(const std::filesystem::path& path)
{
   PoseSequence seq = path.extension() == ".mat" ? load_mhad_mat(path) : load_mhad_text(path);
   validate(seq);
   MhadFileInfo info;
   if(parse_mhad_filename(path.filename().string(), info)) {
      seq.label   = "a" + std::to_string(info.action);
      seq.subject = "s" + std::to_string(info.subject);
      seq.trial   = "t" + std::to_string(info.trial);
   }
   return seq;
}

bool parse_mhad_filename(const std::string& filename, MhadFileInfo& info)
{
   static const std::regex re(R"(a(\d+)_s(\d+)_t(\d+)_skeleton(\.\w+)?)");
   std::smatch m;
   if(!std::regex_match(filename, m, re)) return false;
   info.action  = std::stoi(m[1].str());
   info.subject = std::stoi(m[2].str());
   info.trial   = std::stoi(m[3].str());
   return true;
}

// -- Manifest ----------------------------------------------------------------

bool natural_less(const std::string& a, const std::string& b)
{
   auto split_num = [](const std::string& s) {
      std::size_t p = s.size();
      while(p > 0 && std::isdigit(static_cast<unsigned char>(s[p - 1]))) --p;
      return std::pair<std::string, std::string>(s.substr(0, p), s.substr(p));
   };
   const auto [pa, na] = split_num(a);
   const auto [pb, nb] = split_num(b);
   if(pa != pb || na.empty() || nb.empty()) return a < b;
   if(na.size() != nb.size()) {
      const auto ia = std::stoull(na);
      const auto ib = std::stoull(nb);
      if(ia != ib) return ia < ib;
   }
   return na < nb;
}

void validate(const DatasetManifest& manifest)
{
   const std::set<std::string> classes(manifest.classes.begin(), manifest.classes.end());
   std::set<std::filesystem::path> paths;
   for(const auto& e : manifest.entries) {
      if(!classes.count(e.label)) fail(ErrorKind::Validation, "label '" + e.label + "' not in class list");
      if(!paths.insert(e.path).second) fail(ErrorKind::Validation, "duplicate manifest path " + e.path.string());
   }
}

DatasetManifest make_manifest(std::vector<ManifestEntry> entries)
{
   DatasetManifest m;
   std::set<std::string> labels;
   for(const auto& e : entries) labels.insert(e.label);
   m.classes.assign(labels.begin(), labels.end());
   std::sort(m.classes.begin(), m.classes.end(), natural_less);
   m.entries = std::move(entries);
   validate(m);
   return m;
}

DatasetManifest read_manifest(const std::filesystem::path& path)
{
   std::ifstream in(path);
   if(!in) fail(ErrorKind::Io, "cannot open manifest " + path.string());
   const auto base = path.parent_path();
   std::vector<ManifestEntry> entries;
   std::string line;
   std::size_t line_no = 0;
   while(std::getline(in, line)) {
      ++line_no;
      if(!line.empty() && line.back() == '\r') line.pop_back();
      if(blank(line) || line.front() == '#') continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string f;
      while(std::getline(ss, f, ',')) fields.push_back(f);
      if(fields.size() < 2 || fields.size() > 4)
         fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": expected path,label,subject,trial");
      if(fields[0] == "path" && line_no == 1) continue; // header row
      ManifestEntry e;
      e.path = fields[0];
      if(e.path.is_relative()) e.path = base / e.path;
      e.label = fields[1];
      if(fields.size() > 2) e.subject = fields[2];
      if(fields.size() > 3) e.trial = fields[3];
      if(e.label.empty()) fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": empty label");
      entries.push_back(std::move(e));
   }
   return make_manifest(std::move(entries));
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest)
{
   std::ofstream out(path);
   if(!out) fail(ErrorKind::Io, "cannot write manifest " + path.string());
   const auto base = path.parent_path();
   out << "path,label,subject,trial\n";
   for(const auto& e : manifest.entries) {
      const auto p = std::filesystem::proximate(e.path, base.empty() ? std::filesystem::current_path() : base);
      out << p.generic_string() << ',' << e.label << ',' << e.subject << ',' << e.trial << '\n';
   }
}

DatasetManifest filter_classes(const DatasetManifest& manifest, const std::vector<std::string>& classes)
{
   if(classes.empty()) fail(ErrorKind::EmptyDataset, "empty class subset");
   const std::set<std::string> wanted(classes.begin(), classes.end());
   for(const auto& c : wanted)
      if(std::find(manifest.classes.begin(), manifest.classes.end(), c) == manifest.classes.end())
         fail(ErrorKind::Validation, "class '" + c + "' not present in manifest");
   std::vector<ManifestEntry> kept;
   for(const auto& e : manifest.entries)
      if(wanted.count(e.label)) kept.push_back(e);
   return make_manifest(std::move(kept));
}

std::size_t test_count(std::size_t total, double test_ratio)
{
   if(!(test_ratio > 0.0 && test_ratio < 1.0)) fail(ErrorKind::Validation, "test_ratio must lie in (0, 1)");
   // guard against 0.2 * 5 = 1.0000000000000002 rounding up to 2
   return static_cast<std::size_t>(std::ceil(test_ratio * static_cast<double>(total) - 1e-9));
}

IndexSplit split_indices(std::size_t total, double test_ratio, std::uint64_t seed)
{
   if(total == 0) fail(ErrorKind::EmptyDataset, "cannot split an empty dataset");
   const std::size_t n_test = test_count(total, test_ratio);

   std::vector<std::size_t> order(total);
   std::iota(order.begin(), order.end(), std::size_t{0});
   std::mt19937_64 rng(seed);
   std::shuffle(order.begin(), order.end(), rng);

   IndexSplit out;
   out.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
   out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
   std::sort(out.test.begin(), out.test.end());
   std::sort(out.train.begin(), out.train.end());
   return out;
}

SplitResult split(const DatasetManifest& manifest, double test_ratio, std::uint64_t seed)
{
   if(manifest.entries.empty()) fail(ErrorKind::EmptyDataset, "cannot split an empty manifest");
   const auto idx = split_indices(manifest.size(), test_ratio, seed);
   SplitResult out;
   for(auto* part : {&out.train, &out.test}) {
      part->classes = manifest.classes;
      part->version = manifest.version;
   }
   for(auto i : idx.train) out.train.entries.push_back(manifest.entries[i]);
   for(auto i : idx.test) out.test.entries.push_back(manifest.entries[i]);
   return out;
}

} // namespace har
