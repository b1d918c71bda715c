#pragma once

// JSON model documents. Field names follow schemas/model.schema.json.

#include <optional>
#include <string>

#include <json.hpp>

#include "reanalysis/model.hpp"

namespace reanalysis {

struct ModelDocument {
  StructuralModel model;
  std::optional<PartitionSpec> partition;
};

nlohmann::json model_to_json(const StructuralModel& model, const std::optional<PartitionSpec>& partition = {});

// Structural problems in the document raise SchemaViolation; a well-formed
// document describing an invalid structure raises the model's own errors.
ModelDocument model_from_json(const nlohmann::json& doc);

void write_model_file(const std::string& path, const StructuralModel& model,
                      const std::optional<PartitionSpec>& partition = {});
ModelDocument read_model_file(const std::string& path);

}  // namespace reanalysis
