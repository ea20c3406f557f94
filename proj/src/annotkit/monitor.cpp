#include "annotkit/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "annotkit/error.hpp"
#include "annotkit/rng.hpp"

namespace annotkit {

const char* const kResplitWarning =
    "warning: the test set changed; all previous model evaluations need to be repeated on the new "
    "test set before they can be compared";

LearningCurve record_iteration(LearningCurve curve, IterationRecord record) {
  if (record.metric_name.empty()) fail(ErrorCode::invalid_argument, "empty metric name");
  if (curve.empty()) {
    if (record.iteration != 1) {
      fail(ErrorCode::invalid_argument, "first iteration must be 1, got " + std::to_string(record.iteration));
    }
    if (record.cumulative_train_size <= 0) {
      fail(ErrorCode::invalid_argument, "cumulative train size must be positive");
    }
  } else {
    const auto& last = curve.back();
    if (record.iteration <= last.iteration) {
      fail(ErrorCode::invalid_argument, "duplicate iteration " + std::to_string(record.iteration));
    }
    if (record.iteration != last.iteration + 1) {
      fail(ErrorCode::invalid_argument, "iteration gap: " + std::to_string(last.iteration) + " → " +
                                            std::to_string(record.iteration));
    }
    if (record.cumulative_train_size <= last.cumulative_train_size) {
      fail(ErrorCode::invalid_argument, "cumulative train size must increase (" +
                                            std::to_string(last.cumulative_train_size) + " → " +
                                            std::to_string(record.cumulative_train_size) + ")");
    }
    if (record.metric_name != last.metric_name) {
      fail(ErrorCode::invalid_argument,
           "metric changed from '" + last.metric_name + "' to '" + record.metric_name + "'");
    }
  }
  curve.push_back(std::move(record));
  return curve;
}

PlateauStatus detect_plateau(const LearningCurve& curve, double epsilon, std::int64_t window) {
  if (!(epsilon > 0.0)) fail(ErrorCode::invalid_argument, "epsilon must be > 0");
  if (window < 1) fail(ErrorCode::invalid_argument, "window must be ≥ 1");
  const auto w = static_cast<std::size_t>(window);
  if (curve.size() < w + 1) {
    fail(ErrorCode::invalid_argument, "curve too short: need " + std::to_string(w + 1) +
                                          " records, have " + std::to_string(curve.size()));
  }
  for (std::size_t i = curve.size() - w; i < curve.size(); ++i) {
    if (curve[i].metric_value - curve[i - 1].metric_value >= epsilon) return {};
  }
  return {true, curve[curve.size() - w].iteration};
}

LabelDistribution label_distribution(const std::vector<AnnotationSet>& sets, const LabelSchema& schema) {
  if (schema.task_kind == TaskKind::pair_regress) {
    fail(ErrorCode::invalid_argument, "label distributions need a class or span schema");
  }
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& set : sets) {
    for (const auto& [id, ann] : set.annotations()) {
      if (const auto* c = std::get_if<ClassPayload>(&ann.payload)) {
        ++counts[c->value];
        ++total;
      } else if (const auto* s = std::get_if<SpanPayload>(&ann.payload)) {
        for (const auto& span : s->spans) ++counts[span.label];
        total += s->spans.size();
      }
    }
  }
  if (total == 0) fail(ErrorCode::invalid_argument, "no labeled items");
  LabelDistribution dist;
  for (const auto& [label, count] : counts) {
    if (!schema.has_class(label)) fail(ErrorCode::validation, "label '" + label + "' not in schema");
    dist[label] = static_cast<double>(count) / static_cast<double>(total);
  }
  return dist;
}

double divergence(const LabelDistribution& p, const LabelDistribution& q) {
  double sum = 0.0;
  for (const auto& [label, value] : p) {
    const auto it = q.find(label);
    sum += std::fabs(value - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [label, value] : q) {
    if (p.count(label) == 0) sum += std::fabs(value);
  }
  return std::clamp(sum / 2.0, 0.0, 1.0);
}

const char* to_string(SplitStatus status) {
  return status == SplitStatus::ok ? "ok" : "consider_resplit";
}

RepresentativenessReport check_representativeness(const LabelDistribution& train,
                                                  const LabelDistribution& test, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    fail(ErrorCode::invalid_argument, "threshold must be in (0, 1]");
  }
  RepresentativenessReport report;
  report.divergence = divergence(train, test);
  report.status = report.divergence > threshold ? SplitStatus::consider_resplit : SplitStatus::ok;
  return report;
}

SplitResult resplit(const std::vector<LabeledItem>& pool, const std::vector<std::string>& classes,
                    double test_fraction, std::uint64_t seed, bool stratified) {
  if (pool.size() < 2) fail(ErrorCode::invalid_argument, "pool needs at least 2 documents");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    fail(ErrorCode::invalid_argument, "test fraction must be in (0, 1)");
  }
  {
    std::set<std::string> seen;
    for (const auto& item : pool) {
      if (!seen.insert(item.doc_id).second) {
        fail(ErrorCode::invalid_argument, "duplicate doc_id '" + item.doc_id + "' in pool");
      }
    }
  }

  Rng rng(seed);
  std::vector<std::string> test;
  std::vector<std::string> train;
  auto take = [&](std::vector<std::string> ids, double share) {
    std::sort(ids.begin(), ids.end());
    rng.shuffle(ids);
    const auto k = static_cast<std::size_t>(std::llround(share * static_cast<double>(ids.size())));
    test.insert(test.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
    train.insert(train.end(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end());
  };

  if (stratified) {
    std::map<std::string, std::vector<std::string>> strata;
    for (const auto& c : classes) strata[c];
    for (const auto& item : pool) strata[item.label].push_back(item.doc_id);
    for (const auto& [label, ids] : strata) {
      if (ids.empty()) fail(ErrorCode::invalid_argument, "class '" + label + "' has no documents");
    }
    for (auto& [label, ids] : strata) take(std::move(ids), test_fraction);
  } else {
    std::vector<std::string> ids;
    for (const auto& item : pool) ids.push_back(item.doc_id);
    take(std::move(ids), test_fraction);
  }

  if (test.empty() || train.empty()) {
    fail(ErrorCode::invalid_argument, "test fraction yields an empty split");
  }
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(test), kResplitWarning};
}

namespace {

std::string format_real(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace

void write_curve_csv(std::ostream& out, const LearningCurve& curve) {
  out << "iteration,size,metric,value,agreement\n";
  for (const auto& r : curve) {
    if (r.metric_name.find_first_of(",\n\"") != std::string::npos) {
      fail(ErrorCode::invalid_argument, "metric name may not contain ',', '\"' or newlines");
    }
    out << r.iteration << ',' << r.cumulative_train_size << ',' << r.metric_name << ','
        << format_real(r.metric_value) << ',';
    if (r.agreement_value) out << format_real(*r.agreement_value);
    out << '\n';
  }
}

LearningCurve read_curve_csv(std::istream& in) {
  LearningCurve curve;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "iteration,size,metric,value,agreement") {
        fail(ErrorCode::parse, "curve.csv line 1: unexpected header");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 5) fail(ErrorCode::parse, "curve.csv line " + std::to_string(line_no) + ": expected 5 columns");
    try {
      IterationRecord r;
      r.iteration = std::stoll(cells[0]);
      r.cumulative_train_size = std::stoll(cells[1]);
      r.metric_name = cells[2];
      r.metric_value = std::stod(cells[3]);
      if (!cells[4].empty()) r.agreement_value = std::stod(cells[4]);
      curve = record_iteration(std::move(curve), std::move(r));
    } catch (const std::logic_error&) {
      fail(ErrorCode::parse, "curve.csv line " + std::to_string(line_no) + ": malformed number");
    } catch (const Error& e) {
      fail(ErrorCode::parse, "curve.csv line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return curve;
}

}  // namespace annotkit
