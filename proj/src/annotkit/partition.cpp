#include "annotkit/partition.hpp"

#include <algorithm>
#include <set>

#include "annotkit/error.hpp"
#include "annotkit/rng.hpp"

namespace annotkit {

const char* to_string(PlanMode mode) {
  switch (mode) {
    case PlanMode::simple: return "simple";
    case PlanMode::review: return "review";
    case PlanMode::cross: return "cross";
  }
  return "simple";
}

PlanMode parse_plan_mode(const std::string& name) {
  if (name == "simple") return PlanMode::simple;
  if (name == "review") return PlanMode::review;
  if (name == "cross") return PlanMode::cross;
  fail(ErrorCode::invalid_argument, "unknown plan mode '" + name + "'");
}

const char* to_string(Role role) { return role == Role::annotate ? "annotate" : "review"; }

Role parse_role(const std::string& name) {
  if (name == "annotate") return Role::annotate;
  if (name == "review") return Role::review;
  fail(ErrorCode::parse, "unknown role '" + name + "'");
}

namespace {

void require_unique(const std::vector<std::string>& values, const char* what) {
  std::set<std::string> seen;
  for (const auto& value : values) {
    if (value.empty()) fail(ErrorCode::invalid_argument, std::string("empty id in ") + what);
    if (!seen.insert(value).second) {
      fail(ErrorCode::invalid_argument, std::string("duplicate ") + what + " '" + value + "'");
    }
  }
}

struct Shuffled {
  std::vector<std::string> docs;
  std::vector<std::string> roster;
};

// Documents are shuffled first, then the roster, from one stream.
Shuffled shuffle_inputs(const std::vector<std::string>& doc_ids,
                        const std::vector<std::string>& annotators, std::uint64_t seed) {
  Rng rng(seed);
  Shuffled out{doc_ids, annotators};
  rng.shuffle(out.docs);
  rng.shuffle(out.roster);
  return out;
}

std::vector<Part> deal_round_robin(const std::vector<std::string>& docs, std::size_t n) {
  std::vector<Part> parts(n);
  for (std::size_t i = 0; i < n; ++i) parts[i].index = i;
  for (std::size_t k = 0; k < docs.size(); ++k) parts[k % n].doc_ids.push_back(docs[k]);
  return parts;
}

}  // namespace

BatchPlan split_batch(const std::vector<std::string>& doc_ids,
                      const std::vector<std::string>& annotators, std::uint64_t seed) {
  if (doc_ids.empty()) fail(ErrorCode::invalid_argument, "empty batch");
  if (annotators.empty()) fail(ErrorCode::invalid_argument, "empty roster");
  require_unique(doc_ids, "doc_id");
  require_unique(annotators, "annotator");

  auto shuffled = shuffle_inputs(doc_ids, annotators, seed);
  const auto n = std::min(annotators.size(), doc_ids.size());
  auto parts = deal_round_robin(shuffled.docs, n);

  BatchPlan plan;
  plan.mode = PlanMode::simple;
  plan.roster = annotators;
  for (std::size_t i = 0; i < n; ++i) {
    plan.assignments.push_back(Assignment{std::move(parts[i]), {shuffled.roster[i]}, Role::annotate});
  }
  return plan;
}

BatchPlan assign_review(const BatchPlan& simple_plan) {
  if (simple_plan.mode != PlanMode::simple) {
    fail(ErrorCode::invalid_argument, "review assignment needs a simple plan");
  }
  std::vector<std::string> active;
  for (const auto& id : simple_plan.roster) {
    for (const auto& a : simple_plan.assignments) {
      if (a.annotators.front() == id) {
        active.push_back(id);
        break;
      }
    }
  }
  if (active.size() < 2) fail(ErrorCode::invalid_argument, "no valid review permutation exists");

  BatchPlan plan = simple_plan;
  plan.mode = PlanMode::review;
  for (const auto& a : simple_plan.assignments) {
    const auto pos = static_cast<std::size_t>(
        std::find(active.begin(), active.end(), a.annotators.front()) - active.begin());
    const auto& reviewer = active[(pos + 1) % active.size()];
    plan.assignments.push_back(Assignment{a.part, {reviewer}, Role::review});
  }
  return plan;
}

BatchPlan assign_cross(const std::vector<std::string>& doc_ids,
                       const std::vector<std::string>& annotators, std::uint64_t seed) {
  if (annotators.size() < 2) fail(ErrorCode::invalid_argument, "cross-annotation needs ≥ 2 annotators");
  if (doc_ids.empty()) fail(ErrorCode::invalid_argument, "empty batch");
  require_unique(doc_ids, "doc_id");
  require_unique(annotators, "annotator");

  auto shuffled = shuffle_inputs(doc_ids, annotators, seed);
  const auto n = annotators.size();
  auto parts = deal_round_robin(shuffled.docs, n);

  BatchPlan plan;
  plan.mode = PlanMode::cross;
  plan.roster = annotators;
  for (std::size_t i = 0; i < n; ++i) {
    // Batches smaller than the roster leave trailing parts empty.
    if (parts[i].doc_ids.empty()) continue;
    plan.assignments.push_back(Assignment{
        std::move(parts[i]), {shuffled.roster[i], shuffled.roster[(i + 1) % n]}, Role::annotate});
  }
  return plan;
}

namespace {

std::map<std::string, std::vector<std::string>> tasks_for(const BatchPlan& plan, Role role) {
  std::map<std::string, std::vector<std::string>> tasks;
  for (const auto& a : plan.assignments) {
    if (a.role != role) continue;
    for (const auto& annotator : a.annotators) {
      auto& list = tasks[annotator];
      list.insert(list.end(), a.part.doc_ids.begin(), a.part.doc_ids.end());
    }
  }
  return tasks;
}

}  // namespace

std::map<std::string, std::vector<std::string>> annotate_tasks(const BatchPlan& plan) {
  return tasks_for(plan, Role::annotate);
}

std::map<std::string, std::vector<std::string>> review_tasks(const BatchPlan& plan) {
  return tasks_for(plan, Role::review);
}

std::vector<std::string> plan_doc_ids(const BatchPlan& plan) {
  std::vector<std::string> ids;
  for (const auto& a : plan.assignments) {
    if (a.role != Role::annotate) continue;
    ids.insert(ids.end(), a.part.doc_ids.begin(), a.part.doc_ids.end());
  }
  return ids;
}

}  // namespace annotkit
