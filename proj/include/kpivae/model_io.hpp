#ifndef KPIVAE_MODEL_IO_HPP
#define KPIVAE_MODEL_IO_HPP

#include "kpivae/network.hpp"

#include <string>

namespace kpivae {

/// Self-describing text format: version line, hyperparameters and
/// standardization statistics, every tensor as decimal arrays with full
/// round-trip precision, and a trailing checksum over the preceding bytes.
/// save -> load -> save reproduces the file byte for byte.
std::string serialize_model(const ModelParams& p);
ModelParams parse_model(const std::string& text, const std::string& origin);

void save_model(const std::string& path, const ModelParams& p);
ModelParams load_model(const std::string& path);

}  // namespace kpivae

#endif  // KPIVAE_MODEL_IO_HPP
