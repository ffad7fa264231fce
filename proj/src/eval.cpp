#include "har/eval.hpp"

#include "har/errors.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace har
{
namespace
{
std::size_t index_of(const std::vector<std::string>& classes, const std::string& label)
{
   const auto it = std::find(classes.begin(), classes.end(), label);
   if(it == classes.end()) fail(ErrorKind::Validation, "label '" + label + "' not in the class list");
   return static_cast<std::size_t>(it - classes.begin());
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
   std::ofstream out(path);
   if(!out) fail(ErrorKind::Io, "cannot write " + path.string());
   out << text;
   if(!out) fail(ErrorKind::Io, "write failed for " + path.string());
}
} // namespace

EvalReport score(const std::vector<Prediction>& predictions, const std::vector<std::string>& classes)
{
   if(predictions.empty()) fail(ErrorKind::EmptyInput, "no predictions to score");
   const std::size_t c = classes.size();
   EvalReport r;
   r.classes = classes;
   r.confusion.assign(c, std::vector<int>(c + 1, 0));
   r.total = predictions.size();

   double classify_ms = 0.0, e2e_ms = 0.0;
   for(const auto& p : predictions) {
      const auto t = index_of(classes, p.truth);
      const auto col = p.result.label ? index_of(classes, *p.result.label) : c;
      ++r.confusion[t][col];
      if(col == t) ++r.correct;
      if(col == c) ++r.rejected;
      classify_ms += p.result.elapsed_ms;
      e2e_ms += p.end_to_end_ms;
   }
   r.accuracy      = static_cast<double>(r.correct) / static_cast<double>(r.total);
   r.total_seconds = classify_ms / 1000.0;
   r.per_case_ms   = classify_ms / static_cast<double>(r.total);
   r.end_to_end_ms = e2e_ms / static_cast<double>(r.total);

   r.precision.assign(c, 0.0);
   r.recall.assign(c, 0.0);
   r.f1.assign(c, 0.0);
   r.support.assign(c, 0);
   for(std::size_t k = 0; k < c; ++k) {
      int predicted = 0;
      for(std::size_t t = 0; t < c; ++t) predicted += r.confusion[t][k];
      for(std::size_t col = 0; col <= c; ++col) r.support[k] += r.confusion[k][col];
      const int tp = r.confusion[k][k];
      if(predicted > 0) r.precision[k] = static_cast<double>(tp) / predicted;
      if(r.support[k] > 0) r.recall[k] = static_cast<double>(tp) / r.support[k];
      const double pr = r.precision[k] + r.recall[k];
      if(pr > 0.0) r.f1[k] = 2.0 * r.precision[k] * r.recall[k] / pr;
      r.weighted_f1 += static_cast<double>(r.support[k]) / static_cast<double>(r.total) * r.f1[k];
   }
   return r;
}

nlohmann::ordered_json report_json(const EvalReport& r)
{
   nlohmann::ordered_json j;
   j["classes"]     = r.classes;
   j["columns"]     = r.classes;
   j["columns"].push_back("NullAction");
   j["confusion"]   = r.confusion;
   j["test_cases"]  = r.total;
   j["correct"]     = r.correct;
   j["rejected"]    = r.rejected;
   j["accuracy"]    = r.accuracy;
   j["weighted_f1"] = r.weighted_f1;
   auto per_class   = nlohmann::ordered_json::array();
   for(std::size_t k = 0; k < r.classes.size(); ++k)
      per_class.push_back({{"class", r.classes[k]},
                           {"support", r.support[k]},
                           {"precision", r.precision[k]},
                           {"recall", r.recall[k]},
                           {"f1", r.f1[k]}});
   j["per_class"] = std::move(per_class);
   j["config"]    = r.config;
   return j;
}

nlohmann::ordered_json timing_json(const EvalReport& r)
{
   nlohmann::ordered_json j;
   j["test_cases"]        = r.total;
   j["total_seconds"]     = r.total_seconds;
   j["per_case_ms"]       = r.per_case_ms;
   j["end_to_end_ms"]     = r.end_to_end_ms;
   return j;
}

std::string confusion_csv(const EvalReport& r)
{
   std::ostringstream out;
   out << "truth\\predicted";
   for(const auto& c : r.classes) out << ',' << c;
   out << ",NullAction\n";
   for(std::size_t t = 0; t < r.classes.size(); ++t) {
      out << r.classes[t];
      for(int v : r.confusion[t]) out << ',' << v;
      out << '\n';
   }
   return out.str();
}

std::string summary_csv(const EvalReport& r)
{
   std::ostringstream out;
   out.precision(10);
   const std::string config = r.config.contains("mode") ? r.config["mode"].get<std::string>() : "";
   out << "configuration,classes,test_cases,accuracy_pct,total_time_s,per_case_ms,end_to_end_ms,f1_pct\n";
   out << config << ',' << r.classes.size() << ',' << r.total << ',' << 100.0 * r.accuracy << ','
       << r.total_seconds << ',' << r.per_case_ms << ',' << r.end_to_end_ms << ',' << 100.0 * r.weighted_f1 << '\n';
   return out.str();
}

void write_report(const std::filesystem::path& dir, const EvalReport& report)
{
   std::filesystem::create_directories(dir);
   write_file(dir / "report.json", report_json(report).dump(2) + "\n");
   write_file(dir / "timing.json", timing_json(report).dump(2) + "\n");
   write_file(dir / "report.csv", summary_csv(report));
   write_file(dir / "confusion.csv", confusion_csv(report));
}

} // namespace har
