#include "annotkit/schema_ops.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "annotkit/error.hpp"

namespace annotkit {

ValidationReport validate_adjustment(const ClassAdjustment& adj, const LabelSchema& schema) {
  ValidationReport report;
  if (schema.task_kind == TaskKind::pair_regress) {
    report.push_back({"schema", "class adjustments need a class or span schema"});
    return report;
  }
  std::set<std::string> distinct;
  for (const auto& s : adj.sources) {
    if (!schema.has_class(s)) report.push_back({"sources", "unknown class '" + s + "'"});
    if (!distinct.insert(s).second) report.push_back({"sources", "duplicate source '" + s + "'"});
  }
  switch (adj.op) {
    case AdjustmentOp::drop:
      if (adj.sources.size() != 1) report.push_back({"sources", "drop takes exactly one class"});
      if (adj.target) report.push_back({"target", "drop takes no target"});
      if (schema.classes.size() <= 1) report.push_back({"sources", "cannot drop the last class"});
      break;
    case AdjustmentOp::incorporate:
      if (adj.sources.size() != 1) report.push_back({"sources", "incorporate takes exactly one source"});
      if (!adj.target) {
        report.push_back({"target", "incorporate needs a target"});
      } else {
        if (!schema.has_class(*adj.target)) report.push_back({"target", "unknown class '" + *adj.target + "'"});
        if (distinct.count(*adj.target) != 0) report.push_back({"target", "cannot incorporate a class into itself"});
      }
      break;
    case AdjustmentOp::merge:
      if (adj.sources.size() < 2) report.push_back({"sources", "merge needs at least two sources"});
      if (!adj.target || adj.target->empty()) report.push_back({"target", "merge needs a target name"});
      break;
  }
  return report;
}

namespace {

LabelSchema adjusted_schema(const LabelSchema& schema, const ClassAdjustment& adj) {
  const std::set<std::string> sources(adj.sources.begin(), adj.sources.end());
  LabelSchema out = schema;
  out.classes.clear();
  const bool insert_target = adj.op == AdjustmentOp::merge &&
                             (!schema.has_class(*adj.target) || sources.count(*adj.target) != 0);
  bool inserted = false;
  for (const auto& c : schema.classes) {
    if (sources.count(c) == 0) {
      out.classes.push_back(c);
    } else if (insert_target && !inserted) {
      out.classes.push_back(*adj.target);
      inserted = true;
    }
  }
  return out;
}

}  // namespace

AdjustmentResult apply_adjustment(const Corpus& corpus, const ClassAdjustment& adj) {
  const auto report = validate_adjustment(adj, corpus.schema);
  if (!report.empty()) fail(ErrorCode::invalid_argument, "invalid adjustment: " + describe(report));

  const std::set<std::string> sources(adj.sources.begin(), adj.sources.end());
  const bool dropping = adj.op == AdjustmentOp::drop;
  // For relabeling ops, the label every source occurrence ends up with.
  const std::string target = adj.target.value_or("");

  AdjustmentResult result;
  result.corpus.schema = adjusted_schema(corpus.schema, adj);
  auto& log = result.log;

  for (const auto& set : corpus.sets) {
    AnnotationSet out(set.annotator());
    for (const auto& [id, ann] : set.annotations()) {
      Annotation next = ann;
      bool touched = false;
      bool remove = false;
      if (auto* c = std::get_if<ClassPayload>(&next.payload)) {
        if (sources.count(c->value) != 0) {
          if (dropping) {
            remove = true;
            ++log.occurrences_removed;
          } else if (c->value != target) {
            c->value = target;
            touched = true;
            ++log.occurrences_relabeled;
          }
        }
      } else if (auto* s = std::get_if<SpanPayload>(&next.payload)) {
        std::vector<Span> kept;
        kept.reserve(s->spans.size());
        for (auto span : s->spans) {
          if (sources.count(span.label) == 0) {
            kept.push_back(std::move(span));
          } else if (dropping) {
            touched = true;
            ++log.occurrences_removed;
          } else {
            if (span.label != target) {
              span.label = target;
              touched = true;
              ++log.occurrences_relabeled;
            }
            kept.push_back(std::move(span));
          }
        }
        s->spans = std::move(kept);
      }
      if (remove) {
        ++log.annotations_touched;
        ++log.annotations_removed;
        continue;
      }
      if (touched) ++log.annotations_touched;
      out.put(std::move(next));
    }
    result.corpus.sets.push_back(std::move(out));
  }
  return result;
}

AdjustmentResult replay_adjustments(const Corpus& corpus, const std::vector<ClassAdjustment>& history) {
  AdjustmentResult result{corpus, {}};
  for (std::size_t i = 0; i < history.size(); ++i) {
    try {
      auto step = apply_adjustment(result.corpus, history[i]);
      result.corpus = std::move(step.corpus);
      result.log.annotations_touched += step.log.annotations_touched;
      result.log.occurrences_relabeled += step.log.occurrences_relabeled;
      result.log.occurrences_removed += step.log.occurrences_removed;
      result.log.annotations_removed += step.log.annotations_removed;
    } catch (const Error& e) {
      fail(e.code(), "adjustment history step " + std::to_string(i) + ": " + e.what());
    }
  }
  return result;
}

std::size_t count_occurrences(const Corpus& corpus) {
  std::size_t total = 0;
  for (const auto& set : corpus.sets) {
    for (const auto& [_, ann] : set.annotations()) total += occurrence_count(ann.payload);
  }
  return total;
}

std::string scaffold_guidelines(const LabelSchema& schema, const std::string& task_description,
                                const std::vector<GuidelineExample>& examples) {
  std::ostringstream md;
  md << "# Annotation guidelines\n\n";

  md << "## 1. Task description\n\n";
  md << (task_description.empty() ? "(Describe the task, the data and why it is annotated.)" : task_description)
     << "\n\n";

  md << "## 2. Label descriptions\n\n";
  switch (schema.task_kind) {
    case TaskKind::doc_class:
      md << "| Label | Description |\n|---|---|\n";
      for (const auto& c : schema.classes) md << "| " << c << " | (describe what " << c << " represents) |\n";
      md << "\nEach document must be assigned exactly ONE label.\n\n";
      break;
    case TaskKind::span_label:
      md << "| Label | Description |\n|---|---|\n";
      for (const auto& c : schema.classes) md << "| " << c << " | (describe what " << c << " represents) |\n";
      md << "\nA document may contain any number of labeled spans. Each span carries exactly ONE "
            "label, and spans must not overlap.\n\n";
      break;
    case TaskKind::pair_regress:
      md << "Each sentence pair is assigned exactly ONE score between " << schema.range_lo << " and "
         << schema.range_hi << ".\n\n";
      md << "| Score | Meaning |\n|---|---|\n";
      md << "| " << schema.range_lo << " | (describe the lowest score) |\n";
      md << "| " << schema.range_hi << " | (describe the highest score) |\n\n";
      break;
  }

  md << "## 3. Annotation examples\n\n";
  if (examples.empty()) {
    md << "(Add a few representative examples with their labels.)\n\n";
  } else {
    md << "| Text | Label |\n|---|---|\n";
    for (const auto& ex : examples) md << "| " << ex.text << " | " << ex.label << " |\n";
    md << "\n";
  }

  md << "## 4. Ambiguous cases\n\n";
  md << "- (Describe how to handle cases that fit more than one label or none.)\n";
  if (schema.task_kind == TaskKind::span_label) {
    md << "- Entity boundaries: (state which words belong to a span, e.g. whether leading "
          "modifiers and articles are included.)\n";
  }
  return md.str();
}

}  // namespace annotkit
