#pragma once

#include <filesystem>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hpsteal/defense.hpp"
#include "hpsteal/errors.hpp"
#include "hpsteal/experiments.hpp"

namespace hpsteal {

using Json = nlohmann::json;

enum class Format { Json, Csv };

Format parse_format(std::string_view text);

/// A trained model together with what is needed to use it again.
struct TrainedModel {
  AlgorithmSpec spec{Algorithm::RR, std::nullopt, std::nullopt};
  Hyperparams hyperparams;
  ModelParams params;
};

/// Non-finite values are written as the strings "inf", "-inf" and "nan".
Json number_to_json(double v);
double number_from_json(const Json& j);

Json to_json(const TrainedModel& model);
TrainedModel model_from_json(const Json& j);
TrainedModel load_model(const std::filesystem::path& path);

Json to_json(const StealReport& r);
StealReport steal_report_from_json(const Json& j);
Json to_json(const RoundingSweep& r);
Json to_json(const PerturbationCurve& r);
Json to_json(const CvResult& r);
Json to_json(const StrategyReport& r);
Json to_json(const Sensitivity& r);

std::vector<std::string> csv_header(const TrainedModel&);
std::vector<std::vector<std::string>> csv_rows(const TrainedModel& model);
std::vector<std::string> csv_header(const StealReport&);
std::vector<std::vector<std::string>> csv_rows(const StealReport& r);
std::vector<std::string> csv_header(const RoundingSweep&);
std::vector<std::vector<std::string>> csv_rows(const RoundingSweep& r);
std::vector<std::string> csv_header(const PerturbationCurve&);
std::vector<std::vector<std::string>> csv_rows(const PerturbationCurve& r);
std::vector<std::string> csv_header(const CvResult&);
std::vector<std::vector<std::string>> csv_rows(const CvResult& r);
std::vector<std::string> csv_header(const StrategyReport&);
std::vector<std::vector<std::string>> csv_rows(const StrategyReport& r);
std::vector<std::string> csv_header(const Sensitivity&);
std::vector<std::vector<std::string>> csv_rows(const Sensitivity& r);

void write_csv_line(std::ostream& os, const std::vector<std::string>& cells);

/// JSON: a top-level array with one element per report. CSV: one header row,
/// then every report's rows.
template <typename Report>
void write_report(std::ostream& os, const std::vector<Report>& reports, Format format) {
  if (format == Format::Json) {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    os << arr.dump(2) << '\n';
    return;
  }
  if (reports.empty()) return;
  write_csv_line(os, csv_header(reports.front()));
  for (const auto& r : reports)
    for (const auto& row : csv_rows(r)) write_csv_line(os, row);
}

void write_text_file(const std::filesystem::path& path, const std::string& text);

template <typename Report>
void emit_report(const std::vector<Report>& reports, Format format, const std::filesystem::path& path) {
  if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "no reports to write");
  std::ostringstream os;
  write_report(os, reports, format);
  write_text_file(path, os.str());
}

}  // namespace hpsteal
