#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "annotkit/accelerate.hpp"
#include "annotkit/agreement.hpp"
#include "annotkit/core.hpp"
#include "annotkit/merge.hpp"
#include "annotkit/metrics.hpp"
#include "annotkit/partition.hpp"

// Wire and file formats. Objects are written with a fixed field order and
// parsed strictly: unknown fields are rejected.
namespace annotkit::formats {

using Json = nlohmann::ordered_json;

Json to_json(const LabelSchema& schema);
LabelSchema schema_from_json(const Json& j);

Json to_json(const Document& doc);
Document document_from_json(const Json& j);

Json to_json(const Payload& payload);
Payload payload_from_json(const Json& j);

Json to_json(const Annotation& ann);
Annotation annotation_from_json(const Json& j);

Json to_json(const ClassAdjustment& adj);
ClassAdjustment adjustment_from_json(const Json& j);

Json to_json(const ProjectManifest& manifest);
ProjectManifest manifest_from_json(const Json& j);

Json to_json(const BatchPlan& plan);
BatchPlan plan_from_json(const Json& j);

Json to_json(const Resolution& resolution);
Resolution resolution_from_json(const Json& j);

Json to_json(const Conflict& conflict);
Conflict conflict_from_json(const Json& j);

Json to_json(const MergedDocument& merged);
MergedDocument merged_from_json(const Json& j);

Json to_json(const WeakRule& rule);
WeakRule rule_from_json(const Json& j);

Json to_json(const Prediction& prediction);
Prediction prediction_from_json(const Json& j);

Json to_json(const AgreementReport& report);
Json to_json(const EvalReport& report);
Json to_json(const ValidationReport& report);

// One compact JSON value per line.
std::string dump_line(const Json& j);

// Calls `on_record(line_number, value)` for every non-blank line. Parse and
// record errors are rethrown as Error(parse) prefixed with "<path>:<line>".
void read_jsonl(const std::filesystem::path& path,
                const std::function<void(std::size_t, const Json&)>& on_record);

Json read_json_file(const std::filesystem::path& path);

std::vector<Document> read_documents(const std::filesystem::path& path);
std::vector<Annotation> read_annotations(const std::filesystem::path& path);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);
std::vector<WeakRule> read_rules(const std::filesystem::path& path);
std::vector<Resolution> read_resolutions(const std::filesystem::path& path);

std::string documents_jsonl(const std::vector<Document>& docs);
std::string annotations_jsonl(const AnnotationSet& set);
std::string annotations_jsonl(const std::vector<Annotation>& annotations);

}  // namespace annotkit::formats
