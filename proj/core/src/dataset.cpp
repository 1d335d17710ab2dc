#include "divhash/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "divhash/error.hpp"

namespace divhash {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    fn(line_no, line);
  }
}

double parse_double(std::size_t line, std::string_view tok) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(line, "not a number: '" + std::string(tok) + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(std::size_t line, std::string_view tok) {
  tok = trim(tok);
  Int v{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(line, "not an integer: '" + std::string(tok) + "'");
  }
  return v;
}

std::optional<int> parse_optional_int(std::size_t line, std::string_view tok) {
  tok = trim(tok);
  if (tok.empty()) return std::nullopt;
  return parse_int<int>(line, tok);
}

void normalize_row(std::size_t line, FeatureVector& v) {
  try {
    normalize_in_place(v);
  } catch (const InvalidArgument&) {
    throw ParseError(line, "zero vector");
  }
}

}  // namespace

Dataset::Dataset(std::size_t dim, std::vector<DataPoint> points)
    : dim_(dim), points_(std::move(points)) {
  std::map<int, std::set<int>> seen;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (p.id != i) {
      throw InvalidArgument("dataset ids must be 0..n-1 in order (point " + std::to_string(i) +
                            " has id " + std::to_string(p.id) + ")");
    }
    if (p.vector.dim() != dim_) {
      throw InvalidArgument("point " + std::to_string(i) + " has dimension " +
                            std::to_string(p.vector.dim()) + ", expected " + std::to_string(dim_));
    }
    if (p.category && p.subtopic) seen[*p.category].insert(*p.subtopic);
  }
  for (const auto& [cat, subs] : seen) subtopic_counts_[cat] = static_cast<int>(subs.size());
}

std::optional<int> Dataset::subtopic_count(int category) const {
  const auto it = subtopic_counts_.find(category);
  if (it == subtopic_counts_.end()) return std::nullopt;
  return it->second;
}

void Dataset::set_subtopic_count(int category, int m) {
  if (m < 1) throw InvalidArgument("subtopic count must be >= 1");
  subtopic_counts_[category] = m;
}

void normalize_in_place(FeatureVector& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw InvalidArgument("zero vector");
  v.scale(1.0 / n);
}

Dataset parse_dense(std::string_view text, bool normalize) {
  std::vector<DataPoint> points;
  std::optional<std::size_t> dim;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    DataPoint p;
    p.id = static_cast<PointId>(points.size());
    std::string_view body = line;
    if (const auto c1 = line.find(':'); c1 != std::string_view::npos) {
      const auto c2 = line.find(':', c1 + 1);
      if (c2 == std::string_view::npos || line.find(':', c2 + 1) != std::string_view::npos) {
        throw ParseError(line_no, "label prefix must be 'category:subtopic:'");
      }
      p.category = parse_optional_int(line_no, line.substr(0, c1));
      p.subtopic = parse_optional_int(line_no, line.substr(c1 + 1, c2 - c1 - 1));
      body = line.substr(c2 + 1);
    }
    std::vector<double> values;
    while (true) {
      const auto comma = body.find(',');
      values.push_back(parse_double(line_no, body.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      body = body.substr(comma + 1);
    }
    if (!dim) {
      dim = values.size();
    } else if (*dim != values.size()) {
      throw ParseError(line_no, "ragged row: expected " + std::to_string(*dim) + " values, got " +
                                    std::to_string(values.size()));
    }
    p.vector = FeatureVector::dense(std::move(values));
    if (normalize) normalize_row(line_no, p.vector);
    points.push_back(std::move(p));
  });
  return Dataset(dim.value_or(0), std::move(points));
}

Dataset load_dense(const std::filesystem::path& path, bool normalize) {
  return parse_dense(read_file(path), normalize);
}

void save_dense(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[64];
  for (const auto& p : data) {
    std::string row;
    if (p.category || p.subtopic) {
      if (p.category) row += std::to_string(*p.category);
      row += ':';
      if (p.subtopic) row += std::to_string(*p.subtopic);
      row += ':';
    }
    const auto dense = p.vector.to_dense();
    for (std::size_t c = 0; c < dense.size(); ++c) {
      if (c) row += ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, dense[c]);
      row.append(buf, res.ptr);
    }
    row += '\n';
    out << row;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset parse_sparse(std::string_view text, std::size_t dim, bool normalize) {
  std::vector<DataPoint> points;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    DataPoint p;
    p.id = static_cast<PointId>(points.size());
    std::vector<std::string_view> tokens;
    while (!line.empty()) {
      const auto sp = line.find_first_of(" \t");
      tokens.push_back(line.substr(0, sp));
      if (sp == std::string_view::npos) break;
      line = trim(line.substr(sp + 1));
    }
    std::size_t first_feature = 0;
    if (!tokens.empty() && tokens.front().find(':') == std::string_view::npos) {
      std::string_view labels = tokens.front();
      while (!labels.empty()) {
        const auto comma = labels.find(',');
        p.labels.push_back(parse_int<int>(line_no, labels.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        labels = labels.substr(comma + 1);
      }
      first_feature = 1;
    }
    if (!p.labels.empty()) p.category = p.labels.front();
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    for (std::size_t t = first_feature; t < tokens.size(); ++t) {
      const auto colon = tokens[t].find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "expected idx:val, got '" + std::string(tokens[t]) + "'");
      }
      const auto one_based = parse_int<std::uint64_t>(line_no, tokens[t].substr(0, colon));
      if (one_based == 0 || one_based - 1 >= dim) {
        throw ParseError(line_no, "index out of range: " + std::to_string(one_based));
      }
      const auto i = static_cast<std::uint32_t>(one_based - 1);
      if (!idx.empty() && i <= idx.back()) {
        throw ParseError(line_no, "indices must be strictly increasing");
      }
      idx.push_back(i);
      val.push_back(parse_double(line_no, tokens[t].substr(colon + 1)));
    }
    p.vector = FeatureVector::sparse(dim, std::move(idx), std::move(val));
    if (normalize) normalize_row(line_no, p.vector);
    points.push_back(std::move(p));
  });
  return Dataset(dim, std::move(points));
}

Dataset load_sparse(const std::filesystem::path& path, std::size_t dim, bool normalize) {
  return parse_sparse(read_file(path), dim, normalize);
}

Dataset subset(const Dataset& source, std::span<const PointId> ids) {
  std::vector<DataPoint> points;
  points.reserve(ids.size());
  for (const PointId id : ids) {
    if (id >= source.size()) throw InvalidArgument("subset: id out of range");
    DataPoint p = source[id];
    p.id = static_cast<PointId>(points.size());
    points.push_back(std::move(p));
  }
  Dataset out(source.dim(), std::move(points));
  for (const auto& [cat, m] : source.subtopic_count_per_category()) out.set_subtopic_count(cat, m);
  return out;
}

}  // namespace divhash
