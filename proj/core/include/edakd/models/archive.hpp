#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edakd/models/model.hpp"

namespace edakd::models {

enum class DType : std::uint8_t { float32 = 0, float64 = 1 };

struct ArchiveTensor {
  std::string name;
  tensor::Shape shape;
  DType dtype = DType::float32;
  std::vector<double> values;  // float32 entries hold float-representable values
};

/// Little-endian "EDAW" container: magic, u32 version (1), u32 count, then per
/// tensor u16 name length, name bytes, u8 dtype, u8 ndim, u64 dims[ndim],
/// u64 byte offset into the payload; the payload follows the table.
void write_archive(const std::filesystem::path& path, const std::vector<ArchiveTensor>& tensors);
std::vector<ArchiveTensor> read_archive(const std::filesystem::path& path);

/// Stores every parameter as float32.
void save_model(const std::filesystem::path& path, const ModelGraph& model);
/// Rebuilds the architecture from parameter names and shapes, then loads the
/// values. Throws FormatError on malformed or inconsistent files.
ModelGraph load_model(const std::filesystem::path& path);
/// Architecture implied by a parameter table.
ModelConfig infer_config(const std::vector<ArchiveTensor>& tensors);

}  // namespace edakd::models
