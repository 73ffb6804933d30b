#include "sentinel/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "sentinel/errors.hpp"
#include "sentinel/rng.hpp"

namespace sentinel::capsnet {

namespace {

constexpr char kMagic[8] = {'S', 'N', 'T', 'L', 'C', 'K', 'P', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void put_f64(std::string& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
public:
    Reader(std::string data, std::string name)
        : data_(std::move(data)), name_(std::move(name)) {}

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(
                     static_cast<unsigned char>(data_[pos_ + i]))
                 << (8 * i);
        }
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    void expect_end() const {
        if (pos_ != data_.size()) {
            throw DataError(name_ + ": " + std::to_string(data_.size() - pos_) +
                            " trailing bytes");
        }
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) {
            throw DataError(name_ + ": truncated checkpoint");
        }
    }

    std::string data_;
    std::string name_;
    std::size_t pos_ = 0;
};

// The hashed config block. Field order is part of the format.
std::string config_block(const ModelConfig& c) {
    std::string block;
    put_u64(block, c.input_width);
    put_u64(block, c.class_count);
    put_u64(block, c.conv_filters);
    put_u64(block, c.conv_kernel);
    put_u64(block, c.pc_capsules);
    put_u64(block, c.pc_dim);
    put_u64(block, c.oc_dim);
    put_u64(block, c.routing_iters);
    put_u64(block, c.epochs);
    put_f64(block, c.lr);
    put_u64(block, c.batch_size);
    put_u64(block, c.init_seed);
    return block;
}

void put_tensor(std::string& out, const std::string& name,
                const numerics::Tensor& t) {
    put_u64(out, name.size());
    out.append(name);
    put_u64(out, t.rank());
    for (std::size_t axis = 0; axis < t.rank(); ++axis) {
        put_u64(out, t.dim(axis));
    }
    for (std::size_t i = 0; i < t.size(); ++i) put_f64(out, t[i]);
}

numerics::Tensor read_tensor(Reader& in, const std::string& expected_name) {
    const std::uint64_t name_len = in.u64();
    const std::string name = in.bytes(name_len);
    if (name != expected_name) {
        throw DataError("checkpoint tensor '" + name + "', expected '" +
                        expected_name + "'");
    }
    const std::uint64_t rank = in.u64();
    if (rank > 8) throw DataError("checkpoint tensor rank " + std::to_string(rank));
    numerics::Shape shape(rank);
    std::size_t total = 1;
    for (std::uint64_t axis = 0; axis < rank; ++axis) {
        shape[axis] = in.u64();
        total *= shape[axis];
    }
    std::vector<double> data(total);
    for (std::size_t i = 0; i < total; ++i) data[i] = in.f64();
    numerics::Tensor t(std::move(shape), std::move(data));
    if (!t.all_finite()) {
        throw DataError("checkpoint tensor '" + expected_name +
                        "' holds non-finite values");
    }
    return t;
}

} // namespace

std::uint64_t config_hash(const ModelConfig& config) {
    const std::string block = config_block(config);
    return fnv1a(block.data(), block.size());
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    validate(ckpt.config);
    if (ckpt.labels.size() != ckpt.config.class_count) {
        throw ConfigError("checkpoint has " + std::to_string(ckpt.labels.size()) +
                          " labels for " +
                          std::to_string(ckpt.config.class_count) + " classes");
    }
    std::string out(kMagic, sizeof(kMagic));
    const std::string block = config_block(ckpt.config);
    out.append(block);
    put_u64(out, fnv1a(block.data(), block.size()));
    put_u64(out, ckpt.labels.size());
    for (const LabelInfo& label : ckpt.labels) {
        put_u64(out, label.rp_id.size());
        out.append(label.rp_id);
        put_f64(out, label.x_m);
        put_f64(out, label.y_m);
    }
    put_u64(out, 3);
    put_tensor(out, "F", ckpt.params.F);
    put_tensor(out, "V", ckpt.params.V);
    put_tensor(out, "Wt", ckpt.params.Wt);

    std::ofstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot write '" + path.string() + "'");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file.flush()) throw DataError("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot open '" + path.string() + "'");
    std::string data((std::istreambuf_iterator<char>(file)),
                     std::istreambuf_iterator<char>());
    Reader in(std::move(data), path.string());

    if (in.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
        throw DataError(path.string() + ": not a checkpoint (bad magic)");
    }
    Checkpoint ckpt;
    ckpt.config.input_width = in.u64();
    ckpt.config.class_count = in.u64();
    ckpt.config.conv_filters = in.u64();
    ckpt.config.conv_kernel = in.u64();
    ckpt.config.pc_capsules = in.u64();
    ckpt.config.pc_dim = in.u64();
    ckpt.config.oc_dim = in.u64();
    ckpt.config.routing_iters = in.u64();
    ckpt.config.epochs = in.u64();
    ckpt.config.lr = in.f64();
    ckpt.config.batch_size = in.u64();
    ckpt.config.init_seed = in.u64();
    const std::uint64_t stored_hash = in.u64();
    if (stored_hash != config_hash(ckpt.config)) {
        throw DataError(path.string() + ": config hash mismatch");
    }
    validate(ckpt.config);

    const std::uint64_t label_count = in.u64();
    if (label_count != ckpt.config.class_count) {
        throw DataError(path.string() + ": " + std::to_string(label_count) +
                        " labels for " +
                        std::to_string(ckpt.config.class_count) + " classes");
    }
    ckpt.labels.reserve(label_count);
    for (std::uint64_t i = 0; i < label_count; ++i) {
        LabelInfo label;
        const std::uint64_t len = in.u64();
        label.rp_id = in.bytes(len);
        label.x_m = in.f64();
        label.y_m = in.f64();
        if (!std::isfinite(label.x_m) || !std::isfinite(label.y_m)) {
            throw DataError(path.string() + ": non-finite label coordinates");
        }
        ckpt.labels.push_back(std::move(label));
    }

    if (in.u64() != 3) {
        throw DataError(path.string() + ": expected 3 tensors");
    }
    ckpt.params.F = read_tensor(in, "F");
    ckpt.params.V = read_tensor(in, "V");
    ckpt.params.Wt = read_tensor(in, "Wt");
    in.expect_end();

    const numerics::Shape f_shape{ckpt.config.conv_filters,
                                  ckpt.config.conv_kernel};
    const numerics::Shape v_shape{ckpt.config.pc_capsules, ckpt.config.pc_dim,
                                  ckpt.config.feature_count()};
    const numerics::Shape w_shape{ckpt.config.pc_capsules,
                                  ckpt.config.class_count, ckpt.config.oc_dim,
                                  ckpt.config.pc_dim};
    if (ckpt.params.F.shape() != f_shape || ckpt.params.V.shape() != v_shape ||
        ckpt.params.Wt.shape() != w_shape) {
        throw DataError(path.string() +
                        ": tensor shapes inconsistent with the stored config");
    }
    return ckpt;
}

} // namespace sentinel::capsnet
