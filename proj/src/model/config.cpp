//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include "paccmann/model/config.hpp"

#include <algorithm>

namespace paccmann::model {

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kDnnFp: return "DNN_FP";
    case EncoderKind::kBrnn: return "bRNN";
    case EncoderKind::kScnn: return "SCNN";
    case EncoderKind::kSa: return "SA";
    case EncoderKind::kCa: return "CA";
    case EncoderKind::kMca: return "MCA";
  }
  throw common::InvalidConfig("unknown encoder kind");
}

EncoderKind encoder_kind_from(const std::string& name) {
  if (name == "DNN_FP") return EncoderKind::kDnnFp;
  if (name == "bRNN") return EncoderKind::kBrnn;
  if (name == "SCNN") return EncoderKind::kScnn;
  if (name == "SA") return EncoderKind::kSa;
  if (name == "CA") return EncoderKind::kCa;
  if (name == "MCA") return EncoderKind::kMca;
  throw common::InvalidConfig("unknown encoder: " + name);
}

int ModelConfig::min_smiles_len() const {
  switch (encoder_kind) {
    case EncoderKind::kScnn: return 5;  // largest kernel in the fixed stack
    case EncoderKind::kMca: return std::max(mca_kernel_a, mca_kernel_b);
    default: return 1;
  }
}

void ModelConfig::validate() const {
  if (dense_layers.empty())
    throw common::InvalidConfig("dense_layers must be non-empty");
  for (size_t i = 0; i < dense_layers.size(); ++i) {
    if (dense_layers[i] < 1)
      throw common::InvalidConfig("dense layer width must be positive");
    if (i > 0 && dense_layers[i] >= dense_layers[i - 1])
      throw common::InvalidConfig("dense_layers must be strictly decreasing");
  }
  if (!(dropout >= 0.0 && dropout < 1.0))
    throw common::InvalidConfig("dropout must lie in [0, 1)");
  if (h < 1) throw common::InvalidConfig("h must be positive");
  if (attention_size < 1 || conv_attention_size < 1)
    throw common::InvalidConfig("attention sizes must be positive");
  if (mca_filters < 1)
    throw common::InvalidConfig("mca_filters must be positive");
  if (mca_kernel_a < 1 || mca_kernel_a % 2 == 0 || mca_kernel_b < 1 ||
      mca_kernel_b % 2 == 0)
    throw common::InvalidConfig("mca kernel lengths must be odd");
  if (encoder_kind != EncoderKind::kDnnFp && max_smiles_len < 1)
    throw common::InvalidConfig("max_smiles_len must be positive");
  if (encoder_kind != EncoderKind::kDnnFp &&
      max_smiles_len < min_smiles_len())
    throw common::InvalidConfig(
        "max_smiles_len " + std::to_string(max_smiles_len) +
        " is shorter than the largest convolution kernel " +
        std::to_string(min_smiles_len()));
  if (gene_panel_size < 1)
    throw common::InvalidConfig("gene_panel_size must be positive");
}

void TrainConfig::validate() const {
  if (batch_size < 2)
    throw common::InvalidConfig("batch_size must be at least 2");
  if (max_steps < 0) throw common::InvalidConfig("max_steps must be >= 0");
  if (eval_every < 1) throw common::InvalidConfig("eval_every must be >= 1");
  if (patience < 1) throw common::InvalidConfig("patience must be >= 1");
}

}  // namespace paccmann::model
