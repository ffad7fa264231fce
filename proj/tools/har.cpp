#include "har/config.hpp"
#include "har/depth_lift.hpp"
#include "har/dtw.hpp"
#include "har/errors.hpp"
#include "har/pipeline.hpp"
#include "har/skeleton_io.hpp"
#include "har/streaming.hpp"
#include "har/synth.hpp"
#include "har/uav_bridge.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

namespace
{
using namespace har;
namespace fs = std::filesystem;

struct CommonOptions
{
   std::string config = "encoded";
   std::vector<std::string> sets;
   std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
   cmd->add_option("--config", o.config, "preset (encoded|heavy) or key = value config file")
       ->capture_default_str();
   cmd->add_option("--set", o.sets, "override one key, e.g. --set classifier.k=3 (repeatable)");
   cmd->add_option("--seed", o.seed, "seed for every stochastic step");
}

PipelineConfig resolve_config(const CommonOptions& o)
{
   PipelineConfig cfg;
   if(o.config == "encoded" || o.config == "heavy") cfg = PipelineConfig::preset(o.config);
   else cfg.apply_file(o.config);
   for(const auto& s : o.sets) {
      const auto eq = s.find('=');
      if(eq == std::string::npos) fail(ErrorKind::Config, "--set expects key=value, got '" + s + "'");
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
   }
   if(o.seed) cfg.seed = *o.seed;
   cfg.validate();
   return cfg;
}

std::optional<std::vector<std::string>> parse_classes(const std::string& csv)
{
   if(csv.empty()) return std::nullopt;
   std::vector<std::string> out;
   std::size_t start = 0;
   while(start <= csv.size()) {
      const auto comma = csv.find(',', start);
      auto item        = csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if(!item.empty()) out.push_back(item);
      if(comma == std::string::npos) break;
      start = comma + 1;
   }
   return out;
}

SequenceFormat guess_format(const fs::path& p)
{
   const auto ext = p.extension().string();
   return (ext == ".mat" || ext == ".txt") ? SequenceFormat::MhadSkeleton : SequenceFormat::NeutralNdjson;
}

std::ofstream open_out(const fs::path& p)
{
   if(p.has_parent_path()) fs::create_directories(p.parent_path());
   std::ofstream out(p);
   if(!out) fail(ErrorKind::Io, "cannot write " + p.string());
   return out;
}

// training half of the seeded split, or everything with `all`
std::vector<PoseSequence> training_sequences(const fs::path& manifest_path, const std::string& classes_csv,
                                             const PipelineConfig& cfg, bool all, std::vector<std::string>& classes)
{
   const auto manifest = read_manifest(manifest_path);
   const auto subset   = parse_classes(classes_csv);
   const auto selected = subset ? filter_classes(manifest, *subset) : manifest;
   classes             = selected.classes;
   auto seqs           = load_manifest_sequences(selected);
   if(all) return seqs;
   const auto idx = split_indices(seqs.size(), cfg.test_ratio, cfg.seed);
   std::vector<PoseSequence> train;
   for(auto i : idx.train) train.push_back(std::move(seqs[i]));
   return train;
}

nlohmann::ordered_json result_json(const ClassificationResult& r, const Command& cmd, double e2e_ms)
{
   nlohmann::ordered_json j;
   j["label"]       = r.label ? nlohmann::ordered_json(*r.label) : nlohmann::ordered_json(nullptr);
   j["null_action"] = r.null_action();
   j["command"]     = to_string(cmd);
   auto nb          = nlohmann::ordered_json::array();
   for(std::size_t i = 0; i < r.nearest.size() && i < 5; ++i)
      nb.push_back({{"label", r.nearest[i].label}, {"distance", r.nearest[i].distance}});
   j["neighbors"] = std::move(nb);
   nlohmann::ordered_json votes = nlohmann::ordered_json::object();
   for(const auto& [label, n] : r.votes) votes[label] = n;
   j["votes"]         = std::move(votes);
   j["elapsed_ms"]    = r.elapsed_ms;
   j["end_to_end_ms"] = e2e_ms;
   return j;
}

// -- subcommands --------------------------------------------------------------

int cmd_convert(const fs::path& input, const fs::path& out_dir, const std::string& format)
{
   std::vector<fs::path> files;
   if(fs::is_directory(input)) {
      for(const auto& e : fs::directory_iterator(input))
         if(e.is_regular_file()) files.push_back(e.path());
   } else if(fs::exists(input)) {
      files.push_back(input);
   } else {
      fail(ErrorKind::Io, "no such file or directory: " + input.string());
   }
   std::sort(files.begin(), files.end(),
             [](const fs::path& a, const fs::path& b) { return natural_less(a.filename().string(), b.filename().string()); });

   fs::create_directories(out_dir);
   std::vector<ManifestEntry> entries;
   for(const auto& f : files) {
      MhadFileInfo info;
      const bool mhad_name = parse_mhad_filename(f.filename().string(), info);
      if(format == "mhad" && !mhad_name) continue;
      const auto fmt = format == "mhad" ? SequenceFormat::MhadSkeleton
                       : format == "neutral" ? SequenceFormat::NeutralNdjson
                                             : guess_format(f);
      auto seq = load_sequence(f, fmt);
      ManifestEntry e;
      e.label   = seq.label.value_or(mhad_name ? "a" + std::to_string(info.action) : f.stem().string());
      e.subject = seq.subject.value_or("");
      e.trial   = seq.trial.value_or("");
      e.path    = out_dir / (f.stem().string() + ".ndjson");
      seq.label = e.label;
      save_sequence(e.path, seq);
      entries.push_back(std::move(e));
   }
   if(entries.empty()) fail(ErrorKind::EmptyDataset, "no convertible sequences in " + input.string());
   write_manifest(out_dir / "manifest.csv", make_manifest(std::move(entries)));
   std::cerr << "converted " << files.size() << " files into " << out_dir.string() << '\n';
   return 0;
}

int cmd_lift(const std::string& input, const std::string& output, const std::string& label, const PipelineConfig& cfg)
{
   std::ifstream file;
   std::istream* in = &std::cin;
   if(input != "-") {
      file.open(input);
      if(!file) fail(ErrorKind::Io, "cannot open " + input);
      in = &file;
   }
   PoseSequence seq;
   if(!label.empty()) seq.label = label;
   RawFrameReader reader(*in);
   RawFrame f;
   while(reader.next(f)) seq.frames.push_back(lift_frame(f, cfg.lift));
   if(output == "-") {
      write_neutral(std::cout, seq);
   } else {
      save_sequence(output, seq);
   }
   return 0;
}

int cmd_train_codec(const fs::path& manifest, const std::string& classes_csv, bool all, const fs::path& out,
                    const std::string& curve, const PipelineConfig& cfg)
{
   std::vector<std::string> classes;
   const auto train = training_sequences(manifest, classes_csv, cfg, all, classes);
   std::vector<FeatureSequence> features;
   for(const auto& s : train) features.push_back(featurize(s, cfg));
   const auto scaling = fit_scaling(features);
   Eigen::Index total = 0;
   for(const auto& f : features) total += f.frames();
   Eigen::MatrixXd frames(scaling.min.size(), total);
   Eigen::Index col = 0;
   for(const auto& f : features) {
      frames.middleCols(col, f.frames()) = apply_scaling(f, scaling).values;
      col += f.frames();
   }
   TrainConfig tc = cfg.codec;
   tc.seed        = cfg.seed;
   const auto res = train_codec(frames, scaling.layout, tc);
   save_model(out, res.model, &scaling);
   write_training_curve(curve.empty() ? fs::path(out).replace_extension(".curve.csv") : fs::path(curve), res.curve);
   std::cerr << "trained on " << total << " frames; best epoch " << res.best_epoch << " val loss "
             << res.best_val_loss << '\n';
   return 0;
}

int cmd_build_refs(const fs::path& manifest, const std::string& classes_csv, bool all, const std::string& model,
                   const fs::path& out, const PipelineConfig& cfg)
{
   std::vector<std::string> classes;
   const auto train = training_sequences(manifest, classes_csv, cfg, all, classes);
   TrainingInfo info;
   const auto pipeline = model.empty() ? build_pipeline(train, classes, cfg, &info)
                                       : build_pipeline_with_model(train, classes, cfg, load_model(model), &info);
   if(out.has_parent_path()) fs::create_directories(out.parent_path());
   save_bundle(out, pipeline);
   std::cerr << "bundle with " << pipeline.refs.size() << " references (dim " << pipeline.refs.dim() << ") -> "
             << out.string() << '\n';
   return 0;
}

int cmd_classify(const fs::path& refs, const std::string& input, bool stream, bool raw)
{
   const auto pipeline = load_bundle(refs);
   if(stream) {
      std::ifstream file;
      std::istream* in = &std::cin;
      if(!input.empty() && input != "-") {
         file.open(input);
         if(!file) fail(ErrorKind::Io, "cannot open " + input);
         in = &file;
      }
      const auto s =
          run_stream_classifier(*in, std::cout, pipeline, raw ? StreamInput::RawFrames : StreamInput::Skeleton);
      std::cerr << "frames " << s.frames << ", segments " << s.segments << ", dropped " << s.dropped << ", skipped "
                << s.skipped << '\n';
      return 0;
   }
   if(input.empty()) fail(ErrorKind::Validation, "classify needs --input or --stream");
   PoseSequence seq;
   if(raw) {
      std::ifstream file(input);
      if(!file) fail(ErrorKind::Io, "cannot open " + input);
      RawFrameReader reader(file);
      RawFrame f;
      while(reader.next(f)) seq.frames.push_back(lift_frame(f, pipeline.config.lift));
   } else {
      seq = load_sequence(input, guess_format(input));
   }
   double e2e     = 0.0;
   const auto r   = pipeline.classify(seq, &e2e);
   CommandDispatcher dispatcher(pipeline.config.command_map(), pipeline.config.uav.debounce_s);
   const auto cmd = dispatcher.dispatch(r, 0.0);
   std::cout << result_json(r, cmd, e2e).dump() << '\n';
   return 0;
}

int cmd_eval(const fs::path& manifest, const std::string& classes_csv, const fs::path& out, const PipelineConfig& cfg)
{
   const auto m       = read_manifest(manifest);
   const auto classes = parse_classes(classes_csv);
   if(!classes_csv.empty() && (!classes || classes->empty())) fail(ErrorKind::EmptyDataset, "empty class subset");
   const auto res = run_benchmark(m, classes, cfg, out);
   const auto& r  = res.report;
   std::printf("configuration   %s\n", to_string(cfg.mode).c_str());
   std::printf("classes         %zu\n", r.classes.size());
   std::printf("test cases      %zu/%zu\n", res.test_count, res.train_count + res.test_count);
   std::printf("accuracy        %.2f%%\n", 100.0 * r.accuracy);
   std::printf("weighted F1     %.2f%%\n", 100.0 * r.weighted_f1);
   std::printf("rejected        %zu\n", r.rejected);
   std::printf("total time      %.3f s\n", r.total_seconds);
   std::printf("per case        %.2f ms (end to end %.2f ms)\n", r.per_case_ms, r.end_to_end_ms);
   std::printf("report          %s\n", (out / "report.json").string().c_str());
   return 0;
}

int cmd_simulate(const std::string& scenario, const std::string& out, double duration, std::vector<double> uav,
                 std::vector<double> human, const PipelineConfig& cfg)
{
   const auto script = scenario.empty() ? std::vector<ScriptEvent>{} : load_scenario(scenario);
   SimState s;
   if(uav.size() == 3) {
      s.uav_x   = uav[0];
      s.uav_y   = uav[1];
      s.uav_yaw = uav[2];
   }
   if(human.size() == 2) {
      s.human_x = human[0];
      s.human_y = human[1];
   } else if(!script.empty()) {
      s.human_x = script.front().human_x;
      s.human_y = script.front().human_y;
   } else {
      s.human_x = s.uav_x + cfg.uav.set_distance * std::cos(s.uav_yaw);
      s.human_y = s.uav_y + cfg.uav.set_distance * std::sin(s.uav_yaw);
   }
   const auto log = run_scenario(script, s, cfg.uav, cfg.command_map(), duration);
   if(out == "-") {
      write_sim_log(std::cout, log);
   } else {
      auto f = open_out(out);
      write_sim_log(f, log);
      if(!f) fail(ErrorKind::Io, "write failed for " + out);
   }
   if(!log.empty()) {
      const auto& last = log.back();
      std::cerr << "t " << last.t << " s, bearing " << last.bearing_error * 180.0 / 3.14159265358979323846
                << " deg, range " << last.range << " m\n";
   }
   return 0;
}

int cmd_bench_dtw(std::vector<int> lengths, std::vector<int> dims, std::vector<double> bands, int reps,
                  std::uint64_t seed)
{
   std::mt19937_64 rng(seed);
   std::normal_distribution<double> nd;
   std::printf("length,dim,band,mean_us\n");
   for(int n : lengths)
      for(int d : dims)
         for(double band : bands) {
            Eigen::MatrixXd a(d, n), b(d, n);
            for(Eigen::Index i = 0; i < a.size(); ++i) {
               a.data()[i] = nd(rng);
               b.data()[i] = nd(rng);
            }
            volatile double sink = 0.0;
            const auto start     = std::chrono::steady_clock::now();
            for(int r = 0; r < reps; ++r) sink = sink + dtw_distance(a, b, band);
            const double us =
                std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count() / reps;
            std::printf("%d,%d,%g,%.2f\n", n, d, band, us);
         }
   return 0;
}

int cmd_synth(const fs::path& out, SynthConfig sc, bool noise, int noise_count)
{
   auto seqs = generate_dataset(sc);
   write_dataset(out, seqs);
   if(noise) {
      std::mt19937_64 rng(sc.seed ^ 0x9e3779b97f4a7c15ULL);
      fs::create_directories(out / "noise");
      for(int i = 0; i < noise_count; ++i) {
         auto n = noise_sequence(rng, sc.min_frames + i % (sc.max_frames - sc.min_frames + 1), sc.rate_hz);
         char name[32];
         std::snprintf(name, sizeof name, "noise_%03d.ndjson", i);
         save_sequence(out / "noise" / name, n);
      }
   }
   std::cerr << "wrote " << seqs.size() << " sequences to " << out.string() << '\n';
   return 0;
}

int exit_code(const Error& e)
{
   return e.kind() == ErrorKind::Io ? 2 : 1;
}

} // namespace

int main(int argc, char** argv)
{
   CLI::App app{"Skeleton-based action recognition for UAV command and control"};
   app.require_subcommand(1);
   app.set_version_flag("--version", "har 0.1.0");

   CommonOptions common;

   auto* convert = app.add_subcommand("convert", "convert a dataset (UTD-MHAD) into neutral sequences + manifest");
   std::string conv_in, conv_out, conv_format = "auto";
   convert->add_option("--input", conv_in, "dataset directory or single file")->required();
   convert->add_option("--out", conv_out, "output directory")->required();
   convert->add_option("--format", conv_format, "auto|mhad|neutral")->check(CLI::IsMember({"auto", "mhad", "neutral"}));

   auto* lift = app.add_subcommand("lift", "RawFrame stream -> neutral pose sequence");
   std::string lift_in = "-", lift_out = "-", lift_label;
   lift->add_option("--input", lift_in, "RawFrame NDJSON file or - for stdin");
   lift->add_option("--out", lift_out, "output file or - for stdout");
   lift->add_option("--label", lift_label, "label stored in the sequence header");
   add_common(lift, common);

   auto* train = app.add_subcommand("train-codec", "train the autoencoder on the training split");
   std::string manifest, classes_csv, model_out, curve_out;
   bool use_all = false;
   train->add_option("--manifest", manifest, "dataset manifest CSV")->required();
   train->add_option("--classes", classes_csv, "comma-separated class subset");
   train->add_flag("--all", use_all, "use every sequence instead of the training split");
   train->add_option("--out", model_out, "model file")->required();
   train->add_option("--curve", curve_out, "training curve CSV (default <out>.curve.csv)");
   add_common(train, common);

   auto* refs = app.add_subcommand("build-refs", "build a reference bundle from the training split");
   std::string model_in, bundle_out;
   refs->add_option("--manifest", manifest, "dataset manifest CSV")->required();
   refs->add_option("--classes", classes_csv, "comma-separated class subset");
   refs->add_flag("--all", use_all, "use every sequence instead of the training split");
   refs->add_option("--model", model_in, "reuse a trained model instead of training one");
   refs->add_option("--out", bundle_out, "bundle file")->required();
   add_common(refs, common);

   auto* classify = app.add_subcommand("classify", "classify a sequence file or a live stream");
   std::string bundle_in, cls_in;
   bool stream = false, raw = false;
   classify->add_option("--refs", bundle_in, "reference bundle")->required();
   classify->add_option("--input", cls_in, "sequence file (stream mode: file or -)");
   classify->add_flag("--stream", stream, "segment and classify NDJSON frames from stdin");
   classify->add_flag("--raw", raw, "input is a RawFrame stream that needs depth lifting");

   auto* eval = app.add_subcommand("eval", "split, train, classify the test set and write reports");
   std::string eval_out = "reports";
   eval->add_option("--manifest", manifest, "dataset manifest CSV")->required();
   eval->add_option("--classes", classes_csv, "comma-separated class subset (default: all)");
   eval->add_option("--out", eval_out, "report directory")->capture_default_str();
   add_common(eval, common);

   auto* sim = app.add_subcommand("simulate", "run a UAV tracking scenario");
   std::string scenario, sim_out = "-";
   double duration = 10.0;
   std::vector<double> uav_pose, human_pos;
   sim->add_option("--scenario", scenario, "CSV script: t,human_x,human_y[,label]");
   sim->add_option("--out", sim_out, "log CSV or - for stdout");
   sim->add_option("--duration", duration, "simulated seconds")->capture_default_str();
   sim->add_option("--uav", uav_pose, "initial x,y,yaw")->delimiter(',')->expected(3);
   sim->add_option("--human", human_pos, "initial human x,y")->delimiter(',')->expected(2);
   add_common(sim, common);

   auto* bench = app.add_subcommand("bench-dtw", "DTW latency table");
   std::vector<int> lengths{30, 60, 120}, dims{16, 64, 1749};
   std::vector<double> bands{0.2, 1.0};
   int reps = 20;
   std::uint64_t bench_seed = 1;
   bench->add_option("--lengths", lengths)->delimiter(',')->capture_default_str();
   bench->add_option("--dims", dims)->delimiter(',')->capture_default_str();
   bench->add_option("--bands", bands)->delimiter(',')->capture_default_str();
   bench->add_option("--reps", reps)->check(CLI::PositiveNumber)->capture_default_str();
   bench->add_option("--seed", bench_seed)->capture_default_str();

   auto* synth = app.add_subcommand("synth", "generate the synthetic gesture dataset");
   std::string synth_out;
   SynthConfig sc;
   bool synth_noise  = false;
   int noise_count   = 50;
   synth->add_option("--out", synth_out, "output directory")->required();
   synth->add_option("--per-class", sc.sequences_per_class)->check(CLI::PositiveNumber)->capture_default_str();
   synth->add_option("--sigma", sc.noise_sigma, "landmark noise, m")->capture_default_str();
   synth->add_option("--seed", sc.seed)->capture_default_str();
   synth->add_flag("--noise", synth_noise, "also write pure-noise sequences under noise/");
   synth->add_option("--noise-count", noise_count)->check(CLI::PositiveNumber)->capture_default_str();

   if(argc <= 1) {
      std::cerr << app.help();
      return 1;
   }
   try {
      app.parse(argc, argv);
   } catch(const CLI::CallForHelp& e) {
      return app.exit(e);
   } catch(const CLI::CallForVersion& e) {
      return app.exit(e);
   } catch(const CLI::ParseError& e) {
      app.exit(e);
      return 1;
   }

   try {
      if(*convert) return cmd_convert(conv_in, conv_out, conv_format);
      if(*lift) return cmd_lift(lift_in, lift_out, lift_label, resolve_config(common));
      if(*train) return cmd_train_codec(manifest, classes_csv, use_all, model_out, curve_out, resolve_config(common));
      if(*refs) return cmd_build_refs(manifest, classes_csv, use_all, model_in, bundle_out, resolve_config(common));
      if(*classify) return cmd_classify(bundle_in, cls_in, stream, raw);
      if(*eval) return cmd_eval(manifest, classes_csv, eval_out, resolve_config(common));
      if(*sim) return cmd_simulate(scenario, sim_out, duration, uav_pose, human_pos, resolve_config(common));
      if(*bench) return cmd_bench_dtw(lengths, dims, bands, reps, bench_seed);
      if(*synth) return cmd_synth(synth_out, sc, synth_noise, noise_count);
   } catch(const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return exit_code(e);
   } catch(const std::filesystem::filesystem_error& e) {
      std::cerr << "error: io: " << e.what() << '\n';
      return 2;
   } catch(const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
   }
   return 1;
}
