#include "mfcnn/shapes.hpp"

#include "json.hpp"

#include "mfcnn/errors.hpp"

namespace mfcnn {

std::optional<std::int64_t> window_output_size(std::int64_t n, std::int64_t m,
                                               std::int64_t stride, std::int64_t pad) {
  if (stride < 1 || m < 1 || pad < 0) return std::nullopt;
  const std::int64_t span = n + 2 * pad - m;
  if (span < 0) return std::nullopt;
  return span / stride + 1;
}

namespace {

std::int64_t int_field(const nlohmann::json& j, const char* key, std::int64_t fallback,
                       const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) {
    throw ConfigError(where + "." + key + ": expected an integer");
  }
  return j.at(key).get<std::int64_t>();
}

}  // namespace

ShapeArch parse_shape_arch(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("arch file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("arch file: expected an object");
  ShapeArch arch;
  arch.dims = static_cast<int>(int_field(j, "dims", 1, "arch"));
  if (arch.dims != 1 && arch.dims != 2) throw ConfigError("arch.dims: expected 1 or 2");
  arch.input_size = int_field(j, "input_size", 0, "arch");
  arch.input_channels = int_field(j, "input_channels", 1, "arch");
  if (arch.input_size < 1) throw ConfigError("arch.input_size: must be positive");
  if (arch.input_channels < 1) throw ConfigError("arch.input_channels: must be positive");
  if (!j.contains("layers") || !j["layers"].is_array()) {
    throw ConfigError("arch.layers: expected an array");
  }
  for (std::size_t i = 0; i < j["layers"].size(); ++i) {
    const auto& l = j["layers"][i];
    const std::string where = "arch.layers[" + std::to_string(i) + "]";
    if (!l.is_object() || !l.contains("op") || !l["op"].is_string()) {
      throw ConfigError(where + ".op: expected conv, pool or dense");
    }
    ShapeLayer layer;
    layer.op = l["op"].get<std::string>();
    if (layer.op != "conv" && layer.op != "pool" && layer.op != "dense") {
      throw ConfigError(where + ".op: expected conv, pool or dense");
    }
    layer.name = l.value("name", layer.op + std::to_string(i));
    layer.size = int_field(l, "size", 1, where);
    layer.stride = int_field(l, "stride", 1, where);
    layer.pad = int_field(l, "pad", 0, where);
    layer.filters = int_field(l, "filters", 0, where);
    if (l.contains("expect")) layer.expect = int_field(l, "expect", 0, where);
    if ((layer.op == "conv" || layer.op == "dense") && layer.filters < 1) {
      throw ConfigError(where + ".filters: must be positive");
    }
    arch.layers.push_back(layer);
  }
  return arch;
}

ShapeTable compute_shapes(const ShapeArch& arch) {
  ShapeTable table;
  std::int64_t size = arch.input_size;
  std::int64_t channels = arch.input_channels;
  bool flat = false;
  for (const auto& l : arch.layers) {
    ShapeRow row;
    row.name = l.name;
    row.op = l.op;
    row.expect = l.expect;
    if (l.op == "dense") {
      const std::uint64_t inputs =
          flat ? static_cast<std::uint64_t>(size)
               : static_cast<std::uint64_t>(channels) *
                     static_cast<std::uint64_t>(arch.dims == 2 ? size * size : size);
      row.parameters = inputs * static_cast<std::uint64_t>(l.filters) +
                       static_cast<std::uint64_t>(l.filters);
      size = l.filters;
      channels = 1;
      flat = true;
    } else {
      if (flat) throw ConfigError(l.name + ": windowed layer after a dense layer");
      const auto out = window_output_size(size, l.size, l.stride, l.pad);
      if (!out || *out < 1) {
        throw ConfigError(l.name + ": output size is not positive");
      }
      if (l.op == "conv") {
        const std::uint64_t window =
            static_cast<std::uint64_t>(arch.dims == 2 ? l.size * l.size : l.size);
        row.parameters = static_cast<std::uint64_t>(l.filters) *
                         (window * static_cast<std::uint64_t>(channels) + 1);
        channels = l.filters;
      }
      size = *out;
    }
    row.size = size;
    row.channels = channels;
    row.mismatch = l.expect && *l.expect != size;
    if (row.mismatch) ++table.mismatches;
    table.total_parameters += row.parameters;
    table.rows.push_back(row);
  }
  return table;
}

std::string shape_table_to_json(const ShapeTable& table) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    nlohmann::ordered_json row = {{"name", r.name},
                                  {"op", r.op},
                                  {"size", r.size},
                                  {"channels", r.channels},
                                  {"parameters", r.parameters},
                                  {"expect", nullptr},
                                  {"mismatch", r.mismatch}};
    if (r.expect) row["expect"] = *r.expect;
    rows.push_back(row);
  }
  nlohmann::ordered_json j = {{"rows", rows},
                              {"total_parameters", table.total_parameters},
                              {"mismatches", table.mismatches}};
  return j.dump(2);
}

}  // namespace mfcnn
