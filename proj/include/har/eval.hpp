#pragma once

#include "har/classifier.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace har
{
struct Prediction
{
   std::string truth;
   ClassificationResult result;
   double end_to_end_ms = 0.0; // embedding + encoding + classification
};

struct EvalReport
{
   std::vector<std::string> classes;
   // rows = truth (class order), columns = prediction (class order) + NullAction
   std::vector<std::vector<int>> confusion;
   std::size_t total     = 0;
   std::size_t correct   = 0;
   std::size_t rejected  = 0;
   double accuracy       = 0.0;
   double weighted_f1    = 0.0;
   std::vector<double> precision; // per class
   std::vector<double> recall;
   std::vector<double> f1;
   std::vector<int> support;

   // wall clock; excluded from the deterministic report
   double total_seconds     = 0.0;
   double per_case_ms       = 0.0;
   double end_to_end_ms     = 0.0;

   nlohmann::ordered_json config; // effective configuration snapshot
};

// Accuracy counts NullAction as wrong; per-class precision ignores it.
// Throws EmptyInput.
EvalReport score(const std::vector<Prediction>& predictions, const std::vector<std::string>& classes);

// Deterministic part of the report (no wall-clock fields).
nlohmann::ordered_json report_json(const EvalReport& report);
nlohmann::ordered_json timing_json(const EvalReport& report);
std::string confusion_csv(const EvalReport& report);
std::string summary_csv(const EvalReport& report);

// report.json, timing.json, report.csv, confusion.csv
void write_report(const std::filesystem::path& dir, const EvalReport& report);

} // namespace har
