#ifndef MFCNN_SHAPES_HPP
#define MFCNN_SHAPES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfcnn {

/// floor((n + 2*pad - m)/stride) + 1, or nullopt when non-positive.
std::optional<std::int64_t> window_output_size(std::int64_t n, std::int64_t m,
                                               std::int64_t stride, std::int64_t pad);

struct ShapeLayer {
  std::string name;
  std::string op;  // conv, pool, dense
  std::int64_t size = 1;
  std::int64_t stride = 1;
  std::int64_t pad = 0;
  std::int64_t filters = 0;  // conv output channels / dense neurons
  std::optional<std::int64_t> expect;
};

struct ShapeArch {
  int dims = 1;  // 1: signals, 2: square images (size arithmetic only)
  std::int64_t input_size = 0;
  std::int64_t input_channels = 1;
  std::vector<ShapeLayer> layers;
};

struct ShapeRow {
  std::string name;
  std::string op;
  std::int64_t size = 0;
  std::int64_t channels = 0;
  std::uint64_t parameters = 0;
  std::optional<std::int64_t> expect;
  bool mismatch = false;
};

struct ShapeTable {
  std::vector<ShapeRow> rows;
  std::uint64_t total_parameters = 0;
  std::size_t mismatches = 0;
};

// ConfigError on a malformed description or a non-positive output size.
ShapeArch parse_shape_arch(const std::string& json_text);
ShapeTable compute_shapes(const ShapeArch& arch);
std::string shape_table_to_json(const ShapeTable& table);

}  // namespace mfcnn

#endif  // MFCNN_SHAPES_HPP
