#pragma once

#include <filesystem>
#include <optional>

#include "powerprint/descriptors.hpp"
#include "powerprint/iknn.hpp"

namespace powerprint {

// A fitted classifier plus the descriptor setup that produced its input
// histograms, so saved models reproduce predictions bit-for-bit.
struct ApplianceModel {
  DescriptorSpec descriptor;
  std::optional<BsifBank> bsif_bank;  // present iff descriptor.kind == Bsif
  IknnModel knn;
};

// Line-oriented text format with a "POWERPRINT-MODEL v1" header; floats
// at 17 significant digits so load(save(m)) is field-for-field identical.
void save_model(const ApplianceModel& model, const std::filesystem::path& path);
ApplianceModel load_model(const std::filesystem::path& path);

}  // namespace powerprint
