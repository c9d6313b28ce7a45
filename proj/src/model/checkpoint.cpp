//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include "paccmann/model/checkpoint.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace paccmann::model {

namespace {

constexpr const char* kMagic = "paccmann-checkpoint";
constexpr int kFormatVersion = 1;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_u32_le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void append_f32_le(std::string& out, float v) {
  static_assert(sizeof(float) == 4);
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  append_u32_le(out, bits);
}

uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint32_t crc_of(const std::string& payload) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data()),
              static_cast<uInt>(payload.size()));
  return static_cast<uint32_t>(crc);
}

// Non-parameter tensors that still belong in the checkpoint.
template <typename F>
void for_each_state(Model<float>& m, F&& fn) {
  for (size_t i = 0; i < m.bn_state.size(); ++i) {
    const std::string p = "head." + std::to_string(i);
    fn(p + ".running_mean", m.bn_state[i].running_mean);
    fn(p + ".running_var", m.bn_state[i].running_var);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

long parse_long(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CorruptCheckpoint("bad integer for " + key + ": " + s);
  }
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CorruptCheckpoint("bad real for " + key + ": " + s);
  }
}

}  // namespace

void save(Model<float>& m, const std::string& path) {
  const ModelConfig& cfg = m.cfg;
  std::string payload;
  payload += kMagic;
  payload += '\n';
  std::ostringstream manifest;
  manifest << "format_version=" << kFormatVersion << '\n';
  manifest << "encoder=" << to_string(cfg.encoder_kind) << '\n';
  manifest << "dense_layers=";
  for (size_t i = 0; i < cfg.dense_layers.size(); ++i) {
    if (i) manifest << ',';
    manifest << cfg.dense_layers[i];
  }
  manifest << '\n';
  manifest << "dropout=" << format_double(cfg.dropout) << '\n';
  manifest << "h=" << cfg.h << '\n';
  manifest << "attention_size=" << cfg.attention_size << '\n';
  manifest << "conv_attention_size=" << cfg.conv_attention_size << '\n';
  manifest << "mca_kernel_a=" << cfg.mca_kernel_a << '\n';
  manifest << "mca_kernel_b=" << cfg.mca_kernel_b << '\n';
  manifest << "mca_filters=" << cfg.mca_filters << '\n';
  manifest << "max_smiles_len=" << cfg.max_smiles_len << '\n';
  manifest << "gene_panel_size=" << cfg.gene_panel_size << '\n';
  manifest << "seed=" << cfg.seed << '\n';
  manifest << "ic50_min=" << format_double(m.ic50_min) << '\n';
  manifest << "ic50_max=" << format_double(m.ic50_max) << '\n';
  manifest << "dict=";
  const auto& toks = m.dict.tokens();
  for (size_t i = 2; i < toks.size(); ++i) {  // reserved entries implicit
    if (i > 2) manifest << ' ';
    manifest << toks[i];
  }
  manifest << '\n';
  manifest << "panel=";
  for (size_t i = 0; i < m.panel.genes.size(); ++i) {
    if (i) manifest << ' ';
    manifest << m.panel.genes[i];
  }
  manifest << '\n';
  payload += manifest.str();

  std::vector<std::pair<std::string, const tensor::Tensor<float>*>> arrays;
  for_each_param(m, [&](const std::string& name, tensor::Tensor<float>& t) {
    arrays.emplace_back(name, &t);
  });
  for_each_state(m, [&](const std::string& name, tensor::Tensor<float>& t) {
    arrays.emplace_back(name, &t);
  });
  payload += "arrays=" + std::to_string(arrays.size()) + "\n";
  for (const auto& [name, t] : arrays) {
    payload += "array " + name + ' ' + std::to_string(t->rows) + ' ' +
               std::to_string(t->cols) + '\n';
    for (const float v : t->data) append_f32_le(payload, v);
  }
  const uint32_t crc = crc_of(payload);
  append_u32_le(payload, crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw common::IoError("cannot open for writing: " + path);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw common::IoError("write failed: " + path);
}

Model<float> load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw common::IoError("cannot open: " + path);
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (blob.size() < 4) throw CorruptCheckpoint("file too short: " + path);
  const std::string payload = blob.substr(0, blob.size() - 4);
  const uint32_t stored = read_u32_le(
      reinterpret_cast<const unsigned char*>(blob.data() + blob.size() - 4));
  if (crc_of(payload) != stored) {
    throw CorruptCheckpoint("checksum mismatch: " + path);
  }

  size_t pos = 0;
  auto read_line = [&]() -> std::string {
    if (pos >= payload.size()) {
      throw CorruptCheckpoint("unexpected end of file: " + path);
    }
    const size_t nl = payload.find('\n', pos);
    if (nl == std::string::npos) {
      throw CorruptCheckpoint("unterminated line: " + path);
    }
    std::string line = payload.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };

  if (read_line() != kMagic) {
    throw CorruptCheckpoint("not a checkpoint file: " + path);
  }
  std::map<std::string, std::string> kv;
  std::string arrays_line;
  while (true) {
    const std::string line = read_line();
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw CorruptCheckpoint("malformed manifest line: " + line);
    }
    const std::string key = line.substr(0, eq);
    if (key == "arrays") {
      arrays_line = line.substr(eq + 1);
      break;
    }
    kv[key] = line.substr(eq + 1);
  }
  auto field = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw CorruptCheckpoint("missing manifest key: " + key);
    }
    return it->second;
  };

  if (parse_long(field("format_version"), "format_version") != kFormatVersion) {
    throw VersionMismatch("unsupported checkpoint version " +
                          field("format_version"));
  }

  ModelConfig cfg;
  cfg.encoder_kind = encoder_kind_from(field("encoder"));
  cfg.dense_layers.clear();
  for (const auto& part : split(field("dense_layers"), ',')) {
    cfg.dense_layers.push_back(
        static_cast<int>(parse_long(part, "dense_layers")));
  }
  cfg.dropout = parse_double(field("dropout"), "dropout");
  cfg.h = static_cast<int>(parse_long(field("h"), "h"));
  cfg.attention_size =
      static_cast<int>(parse_long(field("attention_size"), "attention_size"));
  cfg.conv_attention_size = static_cast<int>(
      parse_long(field("conv_attention_size"), "conv_attention_size"));
  cfg.mca_kernel_a =
      static_cast<int>(parse_long(field("mca_kernel_a"), "mca_kernel_a"));
  cfg.mca_kernel_b =
      static_cast<int>(parse_long(field("mca_kernel_b"), "mca_kernel_b"));
  cfg.mca_filters =
      static_cast<int>(parse_long(field("mca_filters"), "mca_filters"));
  cfg.max_smiles_len =
      static_cast<int>(parse_long(field("max_smiles_len"), "max_smiles_len"));
  cfg.gene_panel_size =
      static_cast<int>(parse_long(field("gene_panel_size"), "gene_panel_size"));
  try {
    cfg.seed = std::stoull(field("seed"));
  } catch (const std::exception&) {
    throw CorruptCheckpoint("bad integer for seed: " + field("seed"));
  }

  std::vector<std::string> dict_tokens;
  if (!field("dict").empty()) {
    for (auto& t : split(field("dict"), ' ')) dict_tokens.push_back(t);
  }
  netprop::GenePanel panel;
  for (auto& g : split(field("panel"), ' ')) {
    if (!g.empty()) panel.genes.push_back(g);
  }

  Model<float> m =
      build<float>(cfg, smiles::TokenDictionary(dict_tokens), panel);
  m.ic50_min = parse_double(field("ic50_min"), "ic50_min");
  m.ic50_max = parse_double(field("ic50_max"), "ic50_max");

  std::map<std::string, tensor::Tensor<float>*> slots;
  for_each_param(m, [&](const std::string& name, tensor::Tensor<float>& t) {
    slots[name] = &t;
  });
  for_each_state(m, [&](const std::string& name, tensor::Tensor<float>& t) {
    slots[name] = &t;
  });

  const long n_arrays = parse_long(arrays_line, "arrays");
  if (n_arrays != static_cast<long>(slots.size())) {
    throw CorruptCheckpoint("array count mismatch: expected " +
                            std::to_string(slots.size()) + ", found " +
                            std::to_string(n_arrays));
  }
  std::set<std::string> seen;
  for (long i = 0; i < n_arrays; ++i) {
    const std::string header = read_line();
    const auto parts = split(header, ' ');
    if (parts.size() != 4 || parts[0] != "array") {
      throw CorruptCheckpoint("malformed array header: " + header);
    }
    const std::string& name = parts[1];
    const long rows = parse_long(parts[2], "array rows");
    const long cols = parse_long(parts[3], "array cols");
    const auto it = slots.find(name);
    if (it == slots.end()) {
      throw CorruptCheckpoint("unknown array: " + name);
    }
    if (!seen.insert(name).second) {
      throw CorruptCheckpoint("duplicate array: " + name);
    }
    tensor::Tensor<float>& t = *it->second;
    if (rows != t.rows || cols != t.cols) {
      throw CorruptCheckpoint("array " + name + " has shape " +
                              std::to_string(rows) + "x" +
                              std::to_string(cols) + ", expected " +
                              std::to_string(t.rows) + "x" +
                              std::to_string(t.cols));
    }
    const size_t bytes = static_cast<size_t>(rows) * cols * 4;
    if (pos + bytes > payload.size()) {
      throw CorruptCheckpoint("truncated array data: " + name);
    }
    for (size_t k = 0; k < t.data.size(); ++k) {
      const uint32_t bits = read_u32_le(reinterpret_cast<const unsigned char*>(
          payload.data() + pos + k * 4));
      float v;
      std::memcpy(&v, &bits, 4);
      t.data[k] = v;
    }
    pos += bytes;
  }
  if (pos != payload.size()) {
    throw CorruptCheckpoint("trailing bytes after arrays: " + path);
  }
  return m;
}

}  // namespace paccmann::model
