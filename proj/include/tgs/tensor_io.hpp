#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tgs/linalg.hpp"

namespace tgs {

/// One record of the binary tensor container:
///   magic "CIET" | u8 version=1 | u8 dtype | u8 ndim | u64 LE extent per dim | row-major payload
/// dtype 0 = float32 little-endian, dtype 1 = float64 little-endian.
/// Hidden-state dumps use dtype 0; parameter checkpoints use dtype 1 so that
/// save/load round-trips bit-exactly.
struct TensorData {
    std::uint8_t dtype = 1;
    std::vector<std::uint64_t> shape;
    Vec values; // always widened to double in memory

    std::uint64_t element_count() const {
        std::uint64_t n = 1;
        for (auto e : shape) n *= e;
        return shape.empty() ? 0 : n;
    }
};

inline constexpr std::uint8_t kTensorDtypeF32 = 0;
inline constexpr std::uint8_t kTensorDtypeF64 = 1;

void write_tensor(std::ostream& out, const TensorData& t);
TensorData read_tensor(std::istream& in);

/// Reads the tensor record starting at byte `offset` of `path`.
TensorData read_tensor_at(const std::string& path, std::uint64_t offset);

Mat tensor_to_matrix(const TensorData& t);

} // namespace tgs
