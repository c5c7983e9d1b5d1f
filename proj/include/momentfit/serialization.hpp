#pragma once

#include "momentfit/basis.hpp"
#include "momentfit/density.hpp"

#include "json.hpp"

#include <filesystem>

namespace momentfit {

nlohmann::json descriptor_to_json(const FamilyDescriptor& descriptor);
FamilyDescriptor descriptor_from_json(const nlohmann::json& j);

// {"basis", "coefficients" ([...] or {"re","im"}), "transform" ({mean, matrix} or null), "weight_kind"}.
// Throws InputError for families that cannot be rebuilt from a descriptor.
nlohmann::json model_to_json(const FittedDensity& density);
FittedDensity model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const FittedDensity& density, const nlohmann::json& config = {});
FittedDensity load_model(const std::filesystem::path& path);

}  // namespace momentfit
