//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paccmann/common/error.hpp"
#include "paccmann/tensor/adam.hpp"

namespace paccmann::model {

enum class EncoderKind { kDnnFp, kBrnn, kScnn, kSa, kCa, kMca };

std::string to_string(EncoderKind kind);
EncoderKind encoder_kind_from(const std::string& name);  // InvalidConfig

constexpr int kFingerprintBits = 512;

struct ModelConfig {
  EncoderKind encoder_kind = EncoderKind::kMca;
  std::vector<int> dense_layers = {512, 256, 128, 64, 32, 16};
  double dropout = 0.5;
  int h = 16;                    // token embedding width
  int attention_size = 256;      // SA / CA / MCA-on-embeddings
  int conv_attention_size = 64;  // MCA convolved channels
  int mca_kernel_a = 5, mca_kernel_b = 11, mca_filters = 16;
  int max_smiles_len = 0;   // T, token positions after padding
  int gene_panel_size = 0;  // |G|
  std::uint64_t seed = 0;

  // Smallest T the encoder's convolutions can handle (1 for non-conv kinds).
  int min_smiles_len() const;

  void validate() const;  // throws common::InvalidConfig
};

struct TrainConfig {
  int batch_size = 2048;
  long max_steps = 5000;  // desk-scale default
  tensor::LrSchedule schedule;
  long eval_every = 100;          // steps between validation passes
  int patience = 20;              // eval rounds without improvement
  double target_val_rmse = -1.0;  // negative disables the early target

  void validate() const;
};

}  // namespace paccmann::model
