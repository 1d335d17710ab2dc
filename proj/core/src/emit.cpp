#include <cstdio>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "divhash/error.hpp"
#include "divhash/experiment.hpp"

namespace divhash {
namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string csv_header() { return "method,hash,k,P,SR,D,h,time"; }

std::string format_row(const ResultRow& r) {
  return r.method + ',' + r.hash + ',' + std::to_string(r.k) + ',' + fixed3(r.precision) + ',' +
         fixed3(r.subtopic_recall) + ',' + fixed3(r.diversity) + ',' + fixed3(r.h) + ',' + fixed3(r.seconds);
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = csv_header() + '\n';
  for (const auto& r : rows) out += format_row(r) + '\n';
  return out;
}

std::string to_json(const std::vector<ResultRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"method", r.method},
                   {"hash", r.hash},
                   {"k", r.k},
                   {"P", r.precision},
                   {"SR", r.subtopic_recall},
                   {"D", r.diversity},
                   {"h", r.h},
                   {"time", r.seconds},
                   {"candidate_fraction", r.candidate_fraction},
                   {"queries", r.queries}});
  }
  return arr.dump(2) + '\n';
}

std::vector<ResultRow> rows_from_json(std::string_view text) {
  std::vector<ResultRow> rows;
  try {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw InvalidArgument("result json: expected an array");
    for (const auto& o : arr) {
      ResultRow r;
      r.method = o.at("method").get<std::string>();
      r.hash = o.at("hash").get<std::string>();
      r.k = o.at("k").get<std::size_t>();
      r.precision = o.at("P").get<double>();
      r.subtopic_recall = o.at("SR").get<double>();
      r.diversity = o.at("D").get<double>();
      r.h = o.at("h").get<double>();
      r.seconds = o.at("time").get<double>();
      r.candidate_fraction = o.value("candidate_fraction", 1.0);
      r.queries = o.value("queries", std::size_t{0});
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("result json: ") + e.what());
  }
  return rows;
}

std::string multilabel_csv_header() { return "method,P,R,f,D,h,time_ms"; }

std::string format_row(const MultilabelRow& r) {
  const auto opt = [](const std::optional<double>& v) { return v ? fixed3(*v) : std::string("NA"); };
  return r.method + ',' + fixed3(r.precision) + ',' + fixed3(r.recall) + ',' + fixed3(r.f) + ',' + opt(r.diversity) +
         ',' + opt(r.h) + ',' + fixed3(r.millis);
}

std::string to_csv(const std::vector<MultilabelRow>& rows) {
  std::string out = multilabel_csv_header() + '\n';
  for (const auto& r : rows) out += format_row(r) + '\n';
  return out;
}

std::string to_json(const std::vector<MultilabelRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    arr.push_back({{"method", r.method},
                   {"P", r.precision},
                   {"R", r.recall},
                   {"f", r.f},
                   {"D", opt(r.diversity)},
                   {"h", opt(r.h)},
                   {"time_ms", r.millis},
                   {"eval_fraction", r.eval_fraction},
                   {"cutoff", r.cutoff},
                   {"queries", r.queries}});
  }
  return arr.dump(2) + '\n';
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace divhash
