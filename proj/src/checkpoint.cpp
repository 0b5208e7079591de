#include <algorithm>

#include <zlib.h>

#include "binary_io.hpp"
#include "vra/errors.hpp"
#include "vra/trainer.hpp"

namespace vra {

namespace {

constexpr char checkpoint_magic[4] = {'V', 'R', 'A', 'C'};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

void put_config(detail::ByteWriter& w, const TrainConfig& c) {
    w.put_f64(c.learning_rate);
    w.put_u32(c.batch_size);
    w.put_u32(c.accumulation_steps);
    w.put_f64(c.dropout_rate);
    w.put_u32(c.sequence_length);
    w.put_u32(c.max_epochs);
    w.put_u32(c.early_stop_patience);
    w.put_f64(c.scheduler.factor);
    w.put_u32(c.scheduler.patience);
    w.put_f64(c.scheduler.threshold);
    w.put_f64(c.scheduler.min_lr);
    w.put_f64(c.adamw.beta1);
    w.put_f64(c.adamw.beta2);
    w.put_f64(c.adamw.eps);
    w.put_f64(c.adamw.weight_decay);
    w.put_u64(c.seed);
}

TrainConfig get_config(detail::ByteReader& r) {
    TrainConfig c;
    c.learning_rate = r.get_f64();
    c.batch_size = r.get_u32();
    c.accumulation_steps = r.get_u32();
    c.dropout_rate = r.get_f64();
    c.sequence_length = r.get_u32();
    c.max_epochs = r.get_u32();
    c.early_stop_patience = r.get_u32();
    c.scheduler.factor = r.get_f64();
    c.scheduler.patience = r.get_u32();
    c.scheduler.threshold = r.get_f64();
    c.scheduler.min_lr = r.get_f64();
    c.adamw.beta1 = r.get_f64();
    c.adamw.beta2 = r.get_f64();
    c.adamw.eps = r.get_f64();
    c.adamw.weight_decay = r.get_f64();
    c.seed = r.get_u64();
    return c;
}

void put_tensors(detail::ByteWriter& w, const std::vector<DenseLayer>& layers) {
    for (const auto& layer : layers) {
        for (double v : layer.weight) w.put_f64(v);
        for (double v : layer.bias) w.put_f64(v);
    }
}

std::vector<DenseLayer> get_tensors(detail::ByteReader& r,
                                    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& shapes) {
    std::vector<DenseLayer> layers;
    layers.reserve(shapes.size());
    for (const auto& [in, out] : shapes) {
        DenseLayer layer{in, out, std::vector<double>(std::size_t{in} * out), std::vector<double>(out)};
        for (auto& v : layer.weight) v = r.get_f64();
        for (auto& v : layer.bias) v = r.get_f64();
        layers.push_back(std::move(layer));
    }
    return layers;
}

} // namespace

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
    model.params.validate();
    const auto& layers = model.params.layers;
    if (model.optimizer.m.layers.size() != layers.size() || model.optimizer.v.layers.size() != layers.size()) {
        throw DimensionMismatch("optimizer moments do not match the parameter shapes");
    }

    detail::ByteWriter w;
    w.put_bytes(checkpoint_magic, 4);
    w.put_u16(checkpoint_version);
    put_config(w, model.config);
    w.put_u32(static_cast<std::uint32_t>(layers.size()));
    for (const auto& layer : layers) {
        w.put_u32(static_cast<std::uint32_t>(layer.in_dim));
        w.put_u32(static_cast<std::uint32_t>(layer.out_dim));
    }
    w.put_f64(model.params.dropout_rate);
    w.put_u64(model.optimizer.t);
    w.put_f64(model.optimizer.lr);
    put_tensors(w, layers);
    put_tensors(w, model.optimizer.m.layers);
    put_tensors(w, model.optimizer.v.layers);
    w.put_u32(crc32_of(w.bytes()));
    detail::write_file_bytes(path, w.bytes());
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    const std::string context = path.string();
    detail::ByteReader r(bytes, context);

    char magic[4];
    r.get_bytes(magic, 4);
    if (!std::equal(magic, magic + 4, checkpoint_magic)) {
        throw CorruptionError(context + ": not a checkpoint (bad magic)");
    }
    const auto version = r.get_u16();
    if (version != checkpoint_version) {
        throw VersionError(context + ": unsupported checkpoint version " + std::to_string(version));
    }
    if (bytes.size() < 4 + 2 + 4) {
        throw CorruptionError(context + ": truncated checkpoint");
    }
    const auto body = std::span<const std::uint8_t>(bytes).first(bytes.size() - 4);
    detail::ByteReader trailer(std::span<const std::uint8_t>(bytes).last(4), context);
    if (crc32_of(body) != trailer.get_u32()) {
        throw CorruptionError(context + ": checksum mismatch");
    }

    TrainedModel model;
    model.config = get_config(r);
    const auto n_layers = r.get_u32();
    if (n_layers == 0 || n_layers > 1024) {
        throw CorruptionError(context + ": implausible layer count " + std::to_string(n_layers));
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const auto in = r.get_u32();
        const auto out = r.get_u32();
        shapes.emplace_back(in, out);
    }
    std::size_t total = 0;
    for (const auto& [in, out] : shapes) {
        total += (std::size_t{in} + 1) * out;
    }
    if (r.remaining() != 8 + 8 + 8 + 3 * total * 8 + 4) {
        throw CorruptionError(context + ": size does not match the shape table");
    }
    model.params.dropout_rate = r.get_f64();
    model.optimizer.t = r.get_u64();
    model.optimizer.lr = r.get_f64();
    model.params.layers = get_tensors(r, shapes);
    model.optimizer.m.layers = get_tensors(r, shapes);
    model.optimizer.v.layers = get_tensors(r, shapes);
    model.params.validate();
    return model;
}

} // namespace vra
