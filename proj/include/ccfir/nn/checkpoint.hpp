#pragma once

#include <stdexcept>
#include <string>

#include "ccfir/nn/layers.hpp"

namespace ccfir::nn {

// Versioned binary checkpoint: magic, format version, architecture header
// (M, L, p, N, input width, activation tag), little-endian f64 parameter
// blocks in declared order, batch-norm running statistics, CRC32 trailer.
void save_checkpoint(const std::string& path, const LayerStack& stack);
LayerStack load_checkpoint(const std::string& path);

// Distinct failure modes surface as distinct exception types.
struct CheckpointVersionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CheckpointChecksumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint32_t crc32(const unsigned char* data, std::size_t len);

}  // namespace ccfir::nn
