#include "lam/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json_detail.hpp"

namespace lam {

using detail::json;

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw Error("format_double: conversion failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
        throw Error("parse_double: bad value '" + text + "'");
    }
    return v;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(line.substr(start));
            break;
        }
        parts.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

}  // namespace

std::string tensor_to_csv(const Tensor& t) {
    std::string out;
    for (std::size_t i = 0; i < t.ndim(); ++i) {
        if (i) out += ",";
        out += std::to_string(t.shape()[i]);
    }
    out += "\n";
    const std::size_t row_len = t.ndim() == 2 ? t.cols() : t.numel();
    for (std::size_t i = 0; i < t.numel(); ++i) {
        out += format_double(t.at(i));
        out += (i + 1) % row_len == 0 ? "\n" : ",";
    }
    return out;
}

Tensor tensor_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("tensor csv: empty input");
    Shape shape;
    for (const std::string& part : split(line, ',')) {
        shape.push_back(static_cast<std::size_t>(std::stoull(part)));
    }
    std::vector<double> values;
    values.reserve(shape_numel(shape));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        for (const std::string& part : split(line, ',')) values.push_back(parse_double(part));
    }
    return Tensor::from_values(std::move(shape), std::move(values));
}

void save_tensor_csv(const Tensor& t, const std::filesystem::path& path) {
    write_file(path, tensor_to_csv(t));
}

Tensor load_tensor_csv(const std::filesystem::path& path) {
    return tensor_from_csv(read_file(path));
}

std::string mask_to_grid_csv(const Tensor& values) {
    std::string out;
    const std::size_t rows = values.rows(), cols = values.cols();
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            out += format_double(values.at(i, j));
            out += j + 1 == cols ? "\n" : ",";
        }
    }
    return out;
}

std::string mask_to_json(const Mask& mask) {
    json obj{{"rows", mask.rows()}, {"cols", mask.cols()}};
    json values = json::array();
    for (double v : mask.values.values()) values.push_back(v);
    obj["values"] = std::move(values);
    return obj.dump() + "\n";
}

namespace {

json matrix_to_json(const Tensor& t) {
    json rows = json::array();
    for (std::size_t i = 0; i < t.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < t.cols(); ++j) row.push_back(t.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Tensor matrix_from_json(const json& rows) {
    std::vector<std::vector<double>> data;
    for (const json& row : rows) {
        std::vector<double> r;
        for (const json& v : row) r.push_back(v.get<double>());
        data.push_back(std::move(r));
    }
    return Tensor::from_rows(data);
}

}  // namespace

std::string records_to_json(const std::vector<std::vector<AttentionRecord>>& per_sample) {
    json samples = json::array();
    for (const auto& layers : per_sample) {
        json layer_arr = json::array();
        for (const AttentionRecord& rec : layers) {
            json heads = json::array();
            for (const Tensor& w : rec.weights) heads.push_back(matrix_to_json(w));
            layer_arr.push_back(std::move(heads));
        }
        samples.push_back(std::move(layer_arr));
    }
    return samples.dump() + "\n";
}

std::vector<AttentionRecord> records_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("records: invalid JSON: ") + e.what());
    }
    // Depth probe: matrices sit at depth 3 from a record set (layer -> head
    // -> matrix rows); a file of per-sample sets adds one level.
    auto depth_of = [](const json& node) {
        std::size_t depth = 0;
        const json* cur = &node;
        while (cur->is_array() && !cur->empty()) {
            ++depth;
            cur = &(*cur)[0];
        }
        return depth;
    };
    if (!root.is_array()) throw ConfigError("records: expected a JSON array");
    const std::size_t depth = depth_of(root);
    std::vector<AttentionRecord> records;
    auto parse_record_set = [&](const json& layers) {
        for (const json& heads : layers) {
            AttentionRecord rec;
            for (const json& matrix : heads) rec.weights.push_back(matrix_from_json(matrix));
            records.push_back(std::move(rec));
        }
    };
    if (depth == 5) {
        for (const json& sample : root) parse_record_set(sample);
    } else if (depth == 4) {
        parse_record_set(root);
    } else {
        throw ConfigError("records: unexpected nesting depth " + std::to_string(depth));
    }
    return records;
}

std::string stats_to_json(const DistributionStats& stats) {
    json obj{{"epsilon", stats.epsilon},
             {"fraction_below", stats.fraction_below},
             {"skewness", stats.skewness},
             {"total_weights", stats.total_weights},
             {"bin_edges", stats.bin_edges},
             {"counts", stats.counts}};
    return obj.dump(2) + "\n";
}

std::string histogram_to_csv(const DistributionStats& stats) {
    std::string out = "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < stats.counts.size(); ++i) {
        out += format_double(stats.bin_edges[i]) + "," + format_double(stats.bin_edges[i + 1]) +
               "," + std::to_string(stats.counts[i]) + "\n";
    }
    return out;
}

std::string ablation_to_csv(const std::vector<AblationRow>& rows, bool include_timing) {
    std::string out = "arm,seed,param_count,train_acc,eval_acc,fraction_below,skewness,seconds\n";
    for (const AblationRow& r : rows) {
        out += r.arm + "," + std::to_string(r.seed) + "," + std::to_string(r.param_count) + "," +
               format_double(r.train_acc) + "," + format_double(r.eval_acc) + "," +
               format_double(r.fraction_below) + "," + format_double(r.skewness) + "," +
               format_double(include_timing ? r.seconds : 0.0) + "\n";
    }
    return out;
}

std::string run_result_to_json(const RunResult& result, bool include_timing) {
    json obj;
    obj["train_acc"] = result.train_acc;
    obj["eval_acc"] = result.eval_acc;
    obj["initial_loss"] = result.initial_loss;
    obj["loss_curve"] = result.loss_curve;
    obj["param_count"] = result.param_count;
    if (include_timing) obj["seconds"] = result.seconds;
    obj["attention_stats"] = json{{"epsilon", result.attention_stats.epsilon},
                                  {"fraction_below", result.attention_stats.fraction_below},
                                  {"skewness", result.attention_stats.skewness},
                                  {"total_weights", result.attention_stats.total_weights},
                                  {"bin_edges", result.attention_stats.bin_edges},
                                  {"counts", result.attention_stats.counts}};
    obj["informative_mass"] = result.informative_mass_per_layer;
    obj["config"] = json{{"task", detail::task_to_json(result.task)},
                         {"train", detail::train_to_json(result.train_config)},
                         {"encoder", detail::encoder_to_json(result.encoder_config)}};
    return obj.dump(2) + "\n";
}

void write_run_artifacts(const RunResult& result, const std::filesystem::path& out_dir,
                         bool include_timing) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "result.json", run_result_to_json(result, include_timing));
    write_file(out_dir / "attention_hist.csv", histogram_to_csv(result.attention_stats));
    write_file(out_dir / "records.json", records_to_json(result.probe_records));
    if (!result.probe_masks.empty()) {
        const std::filesystem::path mask_dir = out_dir / "masks";
        std::filesystem::create_directories(mask_dir);
        const std::size_t n_layers = result.probe_masks.front().size();
        for (std::size_t layer = 0; layer < n_layers; ++layer) {
            // Element-wise mean over the probe batch.
            Tensor mean_mask = Tensor::zeros(result.probe_masks.front()[layer].values.shape());
            for (const auto& sample_masks : result.probe_masks) {
                const Tensor& m = sample_masks[layer].values;
                for (std::size_t i = 0; i < m.numel(); ++i) {
                    mean_mask.set(i, mean_mask.at(i) + m.at(i));
                }
            }
            const double inv = 1.0 / static_cast<double>(result.probe_masks.size());
            for (std::size_t i = 0; i < mean_mask.numel(); ++i) {
                mean_mask.set(i, mean_mask.at(i) * inv);
            }
            write_file(mask_dir / ("layer_" + std::to_string(layer) + ".csv"),
                       mask_to_grid_csv(mean_mask));
        }
    }
}

void save_checkpoint(const Encoder& encoder, std::uint64_t step,
                     const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "tensors");
    json manifest{{"config", detail::encoder_to_json(encoder.config())},
                  {"seed", encoder.config().seed},
                  {"step", step}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    for (const auto& [name, tensor] : encoder.named_params()) {
        save_tensor_csv(tensor, dir / "tensors" / (name + ".csv"));
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
    json manifest;
    try {
        manifest = json::parse(read_file(dir / "manifest.json"));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("checkpoint: invalid manifest: ") + e.what());
    }
    detail::reject_unknown_keys(manifest, {"config", "seed", "step"}, "checkpoint");
    EncoderConfig config =
        detail::encoder_from_json(detail::require_key(manifest, "config", "checkpoint"));
    Checkpoint checkpoint{Encoder(config),
                          detail::require_key(manifest, "step", "checkpoint").get<std::uint64_t>()};
    for (auto& [name, tensor] : checkpoint.encoder.named_params()) {
        const std::filesystem::path path = dir / "tensors" / (name + ".csv");
        Tensor loaded = load_tensor_csv(path);
        if (loaded.shape() != tensor.shape()) {
            throw ConfigError("checkpoint: tensor " + name + " has shape " +
                              shape_str(loaded.shape()) + ", expected " +
                              shape_str(tensor.shape()));
        }
        std::copy(loaded.values().begin(), loaded.values().end(), tensor.values_mut().begin());
    }
    return checkpoint;
}

}  // namespace lam
