// Runs the built `har` binary end to end.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "../oracles.hpp"

#include <json.hpp>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using json   = nlohmann::json;

namespace
{
const fs::path har_bin  = HAR_BIN;
const fs::path data_dir = HAR_TEST_DATA;

struct Run
{
   int code = -1;
   std::string out;
   std::string err;
};

std::string slurp(const fs::path& p)
{
   std::ifstream in(p, std::ios::binary);
   std::ostringstream s;
   s << in.rdbuf();
   return s.str();
}

// Fresh scratch directory per call site.
fs::path scratch(const std::string& name)
{
   const auto dir = fs::temp_directory_path() / ("har_cli_" + std::to_string(::getpid())) / name;
   fs::remove_all(dir);
   fs::create_directories(dir);
   return dir;
}

Run run(const std::string& args, const fs::path& dir, const std::string& stdin_file = "")
{
   const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
   std::string cmd = "cd '" + dir.string() + "' && '" + har_bin.string() + "' " + args;
   if(!stdin_file.empty()) cmd += " < '" + stdin_file + "'";
   cmd += " > '" + out.string() + "' 2> '" + err.string() + "'";
   const int status = std::system(cmd.c_str());
   Run r;
   r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
   r.out  = slurp(out);
   r.err  = slurp(err);
   return r;
}

std::vector<std::string> lines(const std::string& text)
{
   std::vector<std::string> out;
   std::istringstream in(text);
   for(std::string l; std::getline(in, l);)
      if(!l.empty()) out.push_back(l);
   return out;
}

// Structural equality with a relative tolerance on numbers; `skip` keys are ignored.
bool close_json(const json& a, const json& b, const std::set<std::string>& skip, std::string& why, const std::string& at = "")
{
   if(a.is_number() && b.is_number()) {
      const double x = a.get<double>(), y = b.get<double>();
      if(std::abs(x - y) <= 1e-6 * std::max({1.0, std::abs(x), std::abs(y)})) return true;
      why = at + ": " + a.dump() + " vs " + b.dump();
      return false;
   }
   if(a.type() != b.type()) {
      why = at + ": type differs";
      return false;
   }
   if(a.is_object()) {
      for(const auto& [k, v] : a.items()) {
         if(skip.count(k)) continue;
         if(!b.contains(k)) {
            why = at + "/" + k + " missing";
            return false;
         }
         if(!close_json(v, b[k], skip, why, at + "/" + k)) return false;
      }
      for(const auto& [k, v] : b.items())
         if(!skip.count(k) && !a.contains(k)) {
            why = at + "/" + k + " unexpected";
            return false;
         }
      return true;
   }
   if(a.is_array()) {
      if(a.size() != b.size()) {
         why = at + ": length differs";
         return false;
      }
      for(std::size_t i = 0; i < a.size(); ++i)
         if(!close_json(a[i], b[i], skip, why, at + "/" + std::to_string(i))) return false;
      return true;
   }
   if(a != b) why = at + ": " + a.dump() + " vs " + b.dump();
   return a == b;
}

// Object key paths; array elements collapse to [].
void key_paths(const json& j, const std::string& at, std::set<std::string>& out)
{
   if(j.is_object())
      for(const auto& [k, v] : j.items()) {
         out.insert(at + "/" + k);
         key_paths(v, at + "/" + k, out);
      }
   else if(j.is_array())
      for(const auto& v : j) key_paths(v, at + "[]", out);
}

// Compares against a golden file, or rewrites it when HAR_UPDATE_GOLDEN is set.
std::string golden(const std::string& name, const std::string& actual)
{
   const auto path = data_dir / name;
   if(std::getenv("HAR_UPDATE_GOLDEN")) {
      std::ofstream(path, std::ios::binary) << actual;
      return actual;
   }
   REQUIRE_MESSAGE(fs::exists(path), "missing golden file " << path);
   return slurp(path);
}

} // namespace

TEST_CASE("no arguments prints usage and exits 1")
{
   const auto dir = scratch("noargs");
   const auto r   = run("", dir);
   CHECK(r.code == 1);
   CHECK(r.out.empty());
   CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("unknown subcommand and bad flags exit 1")
{
   const auto dir = scratch("badflags");
   CHECK(run("frobnicate", dir).code == 1);
   CHECK(run("simulate --duration", dir).code == 1);
}

TEST_CASE("missing input file exits 2")
{
   const auto dir = scratch("missing");
   const auto r   = run("classify --refs does_not_exist.bin --input nope.ndjson", dir);
   CHECK(r.code == 2);
   CHECK(r.err.rfind("error: ", 0) == 0);
   CHECK(run("eval --manifest nowhere/manifest.csv", dir).code == 2);
}

TEST_CASE("unknown config key exits 1")
{
   const auto dir = scratch("badkey");
   std::ofstream(dir / "m.csv") << "path,label,subject,trial\n";
   const auto r = run("eval --manifest m.csv --set classifier.kk=3", dir);
   CHECK(r.code == 1);
   CHECK(r.err.find("classifier.kk") != std::string::npos);
}

TEST_CASE("classify --stream with one sequence prints one result line (golden)")
{
   const auto dir = scratch("stream");
   REQUIRE(run("synth --out refs_data --per-class 6 --seed 7", dir).code == 0);
   REQUIRE(run("synth --out query_data --per-class 1 --seed 8", dir).code == 0);
   REQUIRE(run("build-refs --manifest refs_data/manifest.csv --all --config heavy --out refs.bin", dir).code == 0);

   const auto query = lines(slurp(dir / "query_data" / "manifest.csv")).at(1);
   const auto file  = (dir / "query_data" / query.substr(0, query.find(','))).string();
   const auto r     = run("classify --refs refs.bin --stream", dir, file);
   REQUIRE(r.code == 0);
   const auto out = lines(r.out);
   REQUIRE(out.size() == 1);

   const json got = json::parse(out[0]);
   for(const char* key : {"segment", "t_start", "t_end", "frames", "label", "null_action", "command", "neighbors", "votes",
                          "elapsed_ms"})
      CHECK_MESSAGE(got.contains(key), key);
   const json want = json::parse(golden("classify_stream.golden.json", out[0] + "\n"));
   std::string why;
   CHECK_MESSAGE(close_json(got, want, {"elapsed_ms"}, why), why);
}

TEST_CASE("classify a single file and a RawFrame stream")
{
   const auto dir = scratch("classify");
   REQUIRE(run("synth --out data --per-class 4 --seed 3", dir).code == 0);
   REQUIRE(run("build-refs --manifest data/manifest.csv --all --config heavy --out refs.bin", dir).code == 0);
   const auto first = lines(slurp(dir / "data" / "manifest.csv")).at(1);

   const auto file = run("classify --refs refs.bin --input data/" + first.substr(0, first.find(',')), dir);
   REQUIRE(file.code == 0);
   const json res = json::parse(lines(file.out).at(0));
   CHECK(res["neighbors"][0]["label"] == "a1");
   CHECK(res["neighbors"][0]["distance"].get<double>() == doctest::Approx(0.0));

   const auto raw = run("classify --refs refs.bin --stream --raw", dir, (data_dir / "raw_stream.ndjson").string());
   CHECK(raw.code == 0);
   CHECK(raw.err.find("frames 10") != std::string::npos);
}

TEST_CASE("lift turns the RawFrame fixture into ten pose frames")
{
   const auto dir = scratch("lift");
   const auto r   = run("lift --input '" + (data_dir / "raw_stream.ndjson").string() + "' --out lifted.ndjson --label a1", dir);
   REQUIRE(r.code == 0);
   const auto out = lines(slurp(dir / "lifted.ndjson"));
   REQUIRE(out.size() == 11);
   CHECK(json::parse(out[0])["label"] == "a1");
   const json last = json::parse(out.back());
   CHECK(last["pts"].size() == 13);
   // the right wrist ends about 3 m out, level with the shoulder
   CHECK(last["pts"][6][2].get<double>() == doctest::Approx(2.96).epsilon(0.01));
   CHECK(last["pts"][6][1].get<double>() == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("eval writes reports and repeats byte for byte")
{
   const auto dir = scratch("eval");
   REQUIRE(run("synth --out data --per-class 6 --seed 11", dir).code == 0);
   const std::string args = "eval --manifest data/manifest.csv --config encoded --set codec.epochs=3 --seed 5 --out ";
   const auto a           = run(args + "r1", dir);
   REQUIRE_MESSAGE(a.code == 0, a.err);
   REQUIRE(run(args + "r2", dir).code == 0);

   for(const char* f : {"report.json", "report.csv", "confusion.csv", "timing.json", "layout.csv", "predictions.csv",
                        "training_curve.csv"})
      CHECK_MESSAGE(fs::exists(dir / "r1" / f), f);
   const auto report = slurp(dir / "r1" / "report.json");
   CHECK(report == slurp(dir / "r2" / "report.json"));
   CHECK(slurp(dir / "r1" / "predictions.csv") == slurp(dir / "r2" / "predictions.csv"));

   const json j = json::parse(report);
   CHECK(j["config"]["run"]["test_cases"] == 8); // ceil(0.2 * 36)
   CHECK(j["config"]["pipeline"]["seed"] == "5");

   std::set<std::string> keys;
   key_paths(j, "", keys);
   std::string listed;
   for(const auto& k : keys) listed += k + "\n";
   CHECK(listed == golden("report_keys.golden.txt", listed));
}

TEST_CASE("eval rejects a class subset that is absent")
{
   const auto dir = scratch("eval_subset");
   REQUIRE(run("synth --out data --per-class 2", dir).code == 0);
   CHECK(run("eval --manifest data/manifest.csv --config heavy --classes a99 --out r", dir).code == 1);
}

TEST_CASE("simulate writes a log that converges")
{
   const auto dir = scratch("sim");
   const auto r   = run("simulate --duration 10 --out - --human 7.794,4.5", dir);
   REQUIRE(r.code == 0);
   const auto rows = lines(r.out);
   REQUIRE(rows.size() > 300);
   CHECK(rows[0] == "t,uav_x,uav_y,uav_yaw,human_x,human_y,beta,range,yaw_rate,forward_velocity,command");
   std::vector<double> last;
   std::istringstream in(rows.back());
   for(std::string cell; std::getline(in, cell, ',');) last.push_back(std::atof(cell.c_str()));
   CHECK(std::abs(last[6]) < 0.035);
   CHECK(last[7] == doctest::Approx(6.0).epsilon(0.02));

   std::ofstream(dir / "bad.csv") << "t,human_x,human_y,label\n1.0,6,0,\n0.5,6,0,\n";
   CHECK(run("simulate --scenario bad.csv --out -", dir).code == 1);
   std::ofstream(dir / "script.csv") << "t,human_x,human_y,label\n0,6,0,\n1.0,6,0,a24\n";
   const auto scripted = run("simulate --scenario script.csv --duration 2 --out -", dir);
   REQUIRE(scripted.code == 0);
   CHECK(scripted.out.find(",takeoff") != std::string::npos);
}

TEST_CASE("convert reads MHAD skeleton files into a manifest")
{
   const auto dir = scratch("convert");
   fs::create_directories(dir / "mhad");
   for(const char* name : {"a1_s1_t1_skeleton.mat", "a6_s2_t1_skeleton.mat"}) {
      std::vector<double> data(20 * 3 * 12);
      for(std::size_t i = 0; i < data.size(); ++i) data[i] = 0.01 * static_cast<double>(i % 60) + 0.001 * (i / 60);
      const auto bytes = oracle::mat_file("d_skel", {20, 3, 12}, data, true);
      std::ofstream(dir / "mhad" / name, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                               static_cast<std::streamsize>(bytes.size()));
   }
   const auto r = run("convert --input mhad --out neutral", dir);
   REQUIRE_MESSAGE(r.code == 0, r.err);
   const auto manifest = lines(slurp(dir / "neutral" / "manifest.csv"));
   REQUIRE(manifest.size() == 3);
   CHECK(manifest[1].find(",a1,s1,t1") != std::string::npos);
   CHECK(manifest[2].find(",a6,s2,t1") != std::string::npos);
}

TEST_CASE("bench-dtw prints a latency table")
{
   const auto dir = scratch("bench");
   const auto r   = run("bench-dtw --lengths 8,16 --dims 4 --bands 0.2,1.0 --reps 2", dir);
   REQUIRE(r.code == 0);
   CHECK(lines(r.out).size() >= 5);
}
