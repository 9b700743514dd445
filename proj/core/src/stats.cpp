#include "esdiv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "esdiv/error.hpp"

namespace esdiv {

namespace {

bool nearly_equal(double x, double y) {
  return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
}

std::vector<long long> doubled(std::span<const double> ranks) {
  std::vector<long long> out;
  out.reserve(ranks.size());
  for (double r : ranks) out.push_back(std::llround(2.0 * r));
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> abs_values) {
  const std::size_t n = abs_values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return abs_values[x] < abs_values[y]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && nearly_equal(abs_values[order[j]], abs_values[order[i]])) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

double wilcoxon_exact_p(std::span<const double> ranks, double w) {
  const auto r2 = doubled(ranks);
  const long long total = std::accumulate(r2.begin(), r2.end(), 0LL);
  const long long w2 = std::llround(2.0 * w);
  if (w2 < 0) return 0.0;
  // count[s]: sign assignments whose doubled W+ equals s.
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  long long reach = 0;
  for (long long r : r2) {
    for (long long s = reach; s >= 0; --s) {
      if (count[s] != 0.0) count[s + r] += count[s];
    }
    reach += r;
  }
  double tail = 0.0;
  for (long long s = 0; s <= std::min(w2, total); ++s) tail += count[s];
  const double p = 2.0 * tail / std::ldexp(1.0, static_cast<int>(r2.size()));
  return std::min(1.0, p);
}

double wilcoxon_normal_p(std::span<const double> ranks, double w) {
  double mean = 0.0, var = 0.0;
  for (double r : ranks) {
    mean += r / 2.0;
    var += r * r / 4.0;
  }
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, mean - w - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

WilcoxonResult wilcoxon_signed_rank(const PairedSample& s) {
  if (s.a.size() != s.b.size()) {
    throw Error(ErrorCode::InvalidArgument, "paired samples differ in length");
  }
  WilcoxonResult res;
  std::vector<double> diffs;
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    const double d = s.b[i] - s.a[i];
    if (d == 0.0) {
      ++res.dropped_zero;
    } else {
      diffs.push_back(d);
    }
  }
  if (diffs.empty()) throw Error(ErrorCode::AllZeroDifferences, "every difference is zero");
  if (diffs.size() < kMinPairs) {
    throw Error(ErrorCode::TooFewPairs, std::to_string(diffs.size()) +
                                            " nonzero differences, need at least " +
                                            std::to_string(kMinPairs));
  }
  std::vector<double> abs_d;
  for (double d : diffs) abs_d.push_back(std::abs(d));
  const auto ranks = average_ranks(abs_d);
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    (diffs[i] > 0 ? res.w_plus : res.w_minus) += ranks[i];
  }
  res.w = std::min(res.w_plus, res.w_minus);
  res.n_used = diffs.size();
  res.exact = res.n_used <= kExactMaxN;
  res.p = res.exact ? wilcoxon_exact_p(ranks, res.w) : wilcoxon_normal_p(ranks, res.w);
  return res;
}

double cohens_d(const PairedSample& s) {
  if (s.a.size() != s.b.size()) {
    throw Error(ErrorCode::InvalidArgument, "paired samples differ in length");
  }
  const std::size_t n = s.a.size();
  if (n < 2) throw Error(ErrorCode::TooFewPairs, "effect size needs at least 2 pairs");
  std::vector<double> d(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = s.b[i] - s.a[i];
    scale = std::max(scale, std::abs(d[i]));
  }
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd <= 1e-12 * std::max(1.0, scale)) {
    throw Error(ErrorCode::ZeroVariance, "differences have zero variance");
  }
  return mean / sd;
}

std::vector<PairingField> parse_pairing(std::string_view spec) {
  std::vector<PairingField> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t end = spec.find(',', pos);
    if (end == std::string_view::npos) end = spec.size();
    std::string_view f = spec.substr(pos, end - pos);
    while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
    while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
    if (f == "problem_id") {
      out.push_back(PairingField::ProblemId);
    } else if (f == "model_id") {
      out.push_back(PairingField::ModelId);
    } else if (f == "template_kind") {
      out.push_back(PairingField::TemplateKind);
    } else if (f == "temperature") {
      out.push_back(PairingField::Temperature);
    } else if (f == "gen_seed") {
      out.push_back(PairingField::GenSeed);
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown pairing field '" + std::string(f) + "'");
    }
    pos = end + 1;
  }
  return out;
}

namespace {

std::string cell_key(const DiversityScore& s, std::span<const PairingField> pairing) {
  std::string key;
  for (PairingField f : pairing) {
    if (!key.empty()) key += ',';
    switch (f) {
      case PairingField::ProblemId: key += "problem_id=" + s.problem_id; break;
      case PairingField::ModelId: key += "model_id=" + s.model_id; break;
      case PairingField::TemplateKind:
        key += "template_kind=" + std::string(to_string(s.config.template_kind));
        break;
      case PairingField::Temperature:
        key += "temperature=" + format_number(s.config.temperature);
        break;
      case PairingField::GenSeed: key += "gen_seed=" + std::to_string(s.config.seed); break;
    }
  }
  return key;
}

using Cells = std::map<MetricKind, std::map<std::string, std::pair<double, std::size_t>>>;

Cells group_cells(std::span<const DiversityScore> scores, std::span<const PairingField> pairing) {
  Cells cells;
  for (const auto& s : scores) {
    auto& cell = cells[s.metric][cell_key(s, pairing)];
    cell.first += s.value;
    ++cell.second;
  }
  return cells;
}

}  // namespace

std::vector<ComparisonRow> compare_models(std::span<const DiversityScore> a,
                                          std::span<const DiversityScore> b,
                                          std::span<const PairingField> pairing,
                                          const std::string& label_a, const std::string& label_b) {
  if (pairing.empty()) throw Error(ErrorCode::InvalidArgument, "empty pairing key");
  const Cells ca = group_cells(a, pairing);
  const Cells cb = group_cells(b, pairing);

  std::vector<std::string> unmatched;
  for (const auto& [metric, cells_a] : ca) {
    auto it = cb.find(metric);
    if (it == cb.end()) continue;
    for (const auto& [key, _] : cells_a) {
      if (!it->second.count(key)) {
        unmatched.push_back(label_a + " only: " + std::string(to_string(metric)) + " " + key);
      }
    }
    for (const auto& [key, _] : it->second) {
      if (!cells_a.count(key)) {
        unmatched.push_back(label_b + " only: " + std::string(to_string(metric)) + " " + key);
      }
    }
  }
  if (!unmatched.empty()) {
    std::string msg = std::to_string(unmatched.size()) + " unmatched cells";
    for (const auto& u : unmatched) msg += "; " + u;
    throw Error(ErrorCode::PairingFailure, msg);
  }

  std::vector<ComparisonRow> rows;
  for (const auto& [metric, cells_a] : ca) {
    auto it = cb.find(metric);
    if (it == cb.end()) continue;
    PairedSample sample;
    for (const auto& [key, va] : cells_a) {
      const auto& vb = it->second.at(key);
      sample.labels.push_back(key);
      sample.a.push_back(va.first / static_cast<double>(va.second));
      sample.b.push_back(vb.first / static_cast<double>(vb.second));
    }

    ComparisonRow row;
    row.comparison = label_a + " vs " + label_b;
    row.metric = metric;
    row.n_pairs = sample.a.size();
    const double mean_a = std::accumulate(sample.a.begin(), sample.a.end(), 0.0);
    const double mean_b = std::accumulate(sample.b.begin(), sample.b.end(), 0.0);
    row.winner = mean_b > mean_a ? label_b : mean_a > mean_b ? label_a : "none";

    std::vector<std::string> notes;
    try {
      const auto w = wilcoxon_signed_rank(sample);
      row.w = w.w;
      row.p = w.p;
      row.dropped_zero = w.dropped_zero;
      row.significant = w.p < 0.05;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::AllZeroDifferences) {
        row.dropped_zero = row.n_pairs;
        notes.push_back("no difference");
      } else if (e.code() == ErrorCode::TooFewPairs) {
        notes.push_back("too few pairs");
      } else {
        throw;
      }
    }
    try {
      row.d = cohens_d(sample);
      row.large_effect = std::abs(*row.d) > 0.8;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ZeroVariance) {
        if (notes.empty()) notes.push_back("zero variance");
      } else if (e.code() == ErrorCode::TooFewPairs) {
        if (notes.empty()) notes.push_back("too few pairs");
      } else {
        throw;
      }
    }
    for (const auto& n : notes) row.note += (row.note.empty() ? "" : "; ") + n;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string comparison_csv_header() {
  return "comparison,metric,W_p,ES_d,winner,n_pairs,significant,large_effect,W,dropped_zero,note";
}

std::string comparison_csv_row(const ComparisonRow& r) {
  const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : ""; };
  std::string out;
  out += csv_field(r.comparison) + ',';
  out += std::string(to_string(r.metric)) + ',';
  out += opt(r.p) + ',';
  out += opt(r.d) + ',';
  out += csv_field(r.winner) + ',';
  out += std::to_string(r.n_pairs) + ',';
  out += std::string(r.significant ? "true" : "false") + ',';
  out += std::string(r.large_effect ? "true" : "false") + ',';
  out += opt(r.w) + ',';
  out += std::to_string(r.dropped_zero) + ',';
  out += csv_field(r.note);
  return out;
}

}  // namespace esdiv
