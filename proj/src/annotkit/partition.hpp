#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace annotkit {

struct Part {
  std::size_t index = 0;
  std::vector<std::string> doc_ids;

  bool operator==(const Part&) const = default;
};

enum class Role { annotate, review };

struct Assignment {
  Part part;
  std::vector<std::string> annotators;  // 1 (simple/review) or 2 (cross)
  Role role = Role::annotate;

  bool operator==(const Assignment&) const = default;
};

enum class PlanMode { simple, review, cross };

const char* to_string(PlanMode mode);
PlanMode parse_plan_mode(const std::string& name);
const char* to_string(Role role);
Role parse_role(const std::string& name);

struct BatchPlan {
  std::int64_t iteration = 1;
  PlanMode mode = PlanMode::simple;
  std::vector<std::string> roster;  // as given, before any shuffling
  // A review plan keeps the annotate assignments of the simple plan it was
  // derived from and adds one review assignment per part.
  std::vector<Assignment> assignments;

  bool operator==(const BatchPlan&) const = default;
};

// Shuffles doc_ids and roster with `seed`, then deals documents round-robin
// into one part per annotator.
BatchPlan split_batch(const std::vector<std::string>& doc_ids,
                      const std::vector<std::string>& annotators, std::uint64_t seed);

// Reviewer of the part annotated by roster[i] is roster[(i + 1) % n], where
// roster order is restricted to the plan's annotators.
BatchPlan assign_review(const BatchPlan& simple_plan);

// Part i goes to (r[i], r[(i + 1) % n]) for the seeded roster shuffle r.
BatchPlan assign_cross(const std::vector<std::string>& doc_ids,
                       const std::vector<std::string>& annotators, std::uint64_t seed);

// Documents each annotator must annotate (role annotate) under `plan`.
std::map<std::string, std::vector<std::string>> annotate_tasks(const BatchPlan& plan);
std::map<std::string, std::vector<std::string>> review_tasks(const BatchPlan& plan);

std::vector<std::string> plan_doc_ids(const BatchPlan& plan);

}  // namespace annotkit
