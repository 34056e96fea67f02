#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <zlib.h>

namespace fieno::model {

namespace {

constexpr int kCheckpointVersion = 1;

using ordered_json = nlohmann::ordered_json;

std::vector<double> normal_matrix(Rng& rng, int64_t n, double stddev) {
    std::vector<double> v(n);
    for (auto& e : v) e = rng.normal(0.0, stddev);
    return v;
}

void check_widths(const std::vector<int>& widths, const char* what) {
    if (widths.empty())
        fail(ErrorKind::Validation, std::string(what) + " must be non-empty");
    for (int w : widths)
        if (w < 1)
            fail(ErrorKind::Validation,
                 std::string(what) + " widths must be >= 1");
}

uint32_t crc32_of(const std::string& bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
                static_cast<uInt>(bytes.size()));
    return static_cast<uint32_t>(crc);
}

}  // namespace

void ModelConfig::validate() const {
    check_widths(kan.elm_layers, "kan.elm_layers");
    check_widths(kan.mlp_layers, "kan.mlp_layers");
    check_widths(ian.conv_channels, "ian.conv_channels");
    check_widths(ian.fc_layers, "ian.fc_layers");
    if (kan.d < 1 || ian.d < 1)
        fail(ErrorKind::Validation, "model: d must be >= 1");
    if (kan.d != ian.d)
        fail(ErrorKind::Validation,
             "model: kan.d and ian.d must agree");
    if (kan.mlp_layers.back() != kan.d)
        fail(ErrorKind::Validation,
             "model: final kan.mlp_layers width must equal d");
    if (ian.fc_layers.back() != ian.d)
        fail(ErrorKind::Validation,
             "model: final ian.fc_layers width must equal d");
    if (ian.kernel_size < 1 || ian.kernel_size % 2 == 0)
        fail(ErrorKind::Validation,
             "model: ian.kernel_size must be odd and >= 1");
    if (ian.m < 1) fail(ErrorKind::Validation, "model: ian.m must be >= 1");
}

FienoModel::FienoModel(const ModelConfig& cfg, uint64_t param_seed) {
    cfg_ = cfg;
    cfg_.validate();
    build_fixed();

    // Trainable stacks: weights ~ N(0, 1/fan_in), biases zero.
    {
        Rng rng(derive_seed(param_seed, "kan_mlp"));
        int in = cfg_.kan.elm_layers.back();
        for (int w : cfg_.kan.mlp_layers) {
            mlp_w_.push_back(ad::Tensor::param(
                normal_matrix(rng, static_cast<int64_t>(in) * w,
                              1.0 / std::sqrt(static_cast<double>(in))),
                {in, w}));
            mlp_b_.push_back(ad::Tensor::zeros({w}, true));
            in = w;
        }
    }
    {
        Rng rng(derive_seed(param_seed, "ian_conv"));
        const int k = cfg_.ian.kernel_size;
        int cin = 1;
        for (int cout : cfg_.ian.conv_channels) {
            const int64_t fan_in = static_cast<int64_t>(cin) * k * k;
            conv_w_.push_back(ad::Tensor::param(
                normal_matrix(rng, fan_in * cout,
                              1.0 / std::sqrt(static_cast<double>(fan_in))),
                {cout, cin, k, k}));
            conv_b_.push_back(ad::Tensor::zeros({cout}, true));
            cin = cout;
        }
    }
    {
        Rng rng(derive_seed(param_seed, "ian_fc"));
        int in = cfg_.ian.conv_channels.back() * kBoundaryChannels * cfg_.ian.m;
        for (int w : cfg_.ian.fc_layers) {
            fc_w_.push_back(ad::Tensor::param(
                normal_matrix(rng, static_cast<int64_t>(in) * w,
                              1.0 / std::sqrt(static_cast<double>(in))),
                {in, w}));
            fc_b_.push_back(ad::Tensor::zeros({w}, true));
            in = w;
        }
    }
    lambda_ = ad::Tensor::param({1.0 / cfg_.kan.d}, {1});
    register_params();
}

void FienoModel::build_fixed() {
    elm_weights_.clear();
    int in = kInputFeatures;
    for (size_t i = 0; i < cfg_.kan.elm_layers.size(); ++i) {
        const int w = cfg_.kan.elm_layers[i];
        Rng rng(derive_seed(cfg_.kan.elm_seed, "elm",
                            {static_cast<uint64_t>(i)}));
        elm_weights_.push_back(ad::Tensor::constant(
            normal_matrix(rng, static_cast<int64_t>(in) * w, 1.0), {in, w}));
        in = w;
    }
}

void FienoModel::register_params() {
    params_.clear();
    names_.clear();
    for (size_t i = 0; i < mlp_w_.size(); ++i) {
        params_.push_back(mlp_w_[i]);
        names_.push_back("kan_mlp_w" + std::to_string(i));
        params_.push_back(mlp_b_[i]);
        names_.push_back("kan_mlp_b" + std::to_string(i));
    }
    for (size_t i = 0; i < conv_w_.size(); ++i) {
        params_.push_back(conv_w_[i]);
        names_.push_back("ian_conv_w" + std::to_string(i));
        params_.push_back(conv_b_[i]);
        names_.push_back("ian_conv_b" + std::to_string(i));
    }
    for (size_t i = 0; i < fc_w_.size(); ++i) {
        params_.push_back(fc_w_[i]);
        names_.push_back("ian_fc_w" + std::to_string(i));
        params_.push_back(fc_b_[i]);
        names_.push_back("ian_fc_b" + std::to_string(i));
    }
    params_.push_back(lambda_);
    names_.push_back("lambda");
}

ad::Tensor FienoModel::kan_forward(const std::vector<geom::Point2>& points) {
    if (points.empty())
        fail(ErrorKind::Validation, "kan_forward: no interior points");
    const int n = static_cast<int>(points.size());
    std::vector<double> feats(static_cast<size_t>(n) * kInputFeatures);
    for (int i = 0; i < n; ++i) {
        feats[static_cast<size_t>(i) * 4 + 0] = points[i].x;
        feats[static_cast<size_t>(i) * 4 + 1] = points[i].y;
        feats[static_cast<size_t>(i) * 4 + 2] = points[i].r;
        feats[static_cast<size_t>(i) * 4 + 3] = points[i].theta;
    }
    ad::Tensor h = ad::Tensor::constant(std::move(feats), {n, kInputFeatures});
    for (const auto& w : elm_weights_) h = ad::matmul(h, w);
    h = ad::cos(h);
    for (size_t i = 0; i < mlp_w_.size(); ++i) {
        h = ad::add_rowvec(ad::matmul(h, mlp_w_[i]), mlp_b_[i]);
        if (i + 1 < mlp_w_.size()) h = ad::gelu(h);
    }
    return h;
}

ad::Tensor FienoModel::ian_forward(
    const std::vector<geom::BoundarySample>& boundary) {
    const int m = cfg_.ian.m;
    if (static_cast<int>(boundary.size()) != m)
        fail(ErrorKind::Validation,
             "ian_forward: expected exactly " + std::to_string(m) +
                 " boundary samples, got " + std::to_string(boundary.size()));
    // Canonical ordering: ascending alpha (ties broken by coordinates) so
    // the convolution always sees the same spatial layout.
    std::vector<const geom::BoundarySample*> sorted(boundary.size());
    for (size_t i = 0; i < boundary.size(); ++i) sorted[i] = &boundary[i];
    std::sort(sorted.begin(), sorted.end(),
              [](const geom::BoundarySample* a, const geom::BoundarySample* b) {
                  if (a->alpha != b->alpha) return a->alpha < b->alpha;
                  if (a->point.x != b->point.x) return a->point.x < b->point.x;
                  return a->point.y < b->point.y;
              });
    std::vector<double> img(static_cast<size_t>(kBoundaryChannels) * m);
    for (int i = 0; i < m; ++i) {
        const auto& s = *sorted[i];
        img[static_cast<size_t>(0) * m + i] = s.value;
        img[static_cast<size_t>(1) * m + i] = s.point.x;
        img[static_cast<size_t>(2) * m + i] = s.point.y;
        img[static_cast<size_t>(3) * m + i] = s.point.r;
        img[static_cast<size_t>(4) * m + i] = s.point.theta;
    }
    ad::Tensor h =
        ad::Tensor::constant(std::move(img), {1, kBoundaryChannels, m});
    for (size_t i = 0; i < conv_w_.size(); ++i)
        h = ad::gelu(ad::conv2d(h, conv_w_[i], conv_b_[i], ad::Padding::Same));
    h = ad::reshape(h, {1, static_cast<int>(h.size())});
    for (size_t i = 0; i < fc_w_.size(); ++i) {
        h = ad::add_rowvec(ad::matmul(h, fc_w_[i]), fc_b_[i]);
        if (i + 1 < fc_w_.size()) h = ad::gelu(h);
    }
    return ad::reshape(h, {cfg_.ian.d});
}

ad::Tensor FienoModel::forward(
    const std::vector<geom::BoundarySample>& boundary,
    const std::vector<geom::Point2>& points) {
    ad::Tensor kan = kan_forward(points);                       // [N, D]
    ad::Tensor ian = ad::reshape(ian_forward(boundary),
                                 {cfg_.ian.d, 1});              // [D, 1]
    ad::Tensor dots = ad::matmul(kan, ian);                     // [N, 1]
    ad::Tensor scaled = ad::scale_by_scalar_param(dots, lambda_);
    return ad::reshape(scaled, {static_cast<int>(points.size())});
}

std::vector<double> FienoModel::predict(
    const std::vector<geom::BoundarySample>& boundary,
    const std::vector<geom::Point2>& points) {
    return forward(boundary, points).data();
}

std::vector<std::vector<double>> FienoModel::snapshot() const {
    std::vector<std::vector<double>> snap;
    snap.reserve(params_.size());
    for (const auto& p : params_) snap.push_back(p.data());
    return snap;
}

void FienoModel::restore(const std::vector<std::vector<double>>& snap) {
    if (snap.size() != params_.size())
        fail(ErrorKind::Validation, "restore: parameter count mismatch");
    for (size_t i = 0; i < snap.size(); ++i) {
        if (snap[i].size() != params_[i].data().size())
            fail(ErrorKind::Validation, "restore: parameter size mismatch");
        params_[i].data() = snap[i];
    }
}

FienoModel FienoModel::clone() const {
    FienoModel copy(cfg_, /*param_seed=*/0);
    copy.restore(snapshot());
    return copy;
}

namespace {

ordered_json config_to_json(const ModelConfig& cfg) {
    ordered_json j;
    j["kan"] = {{"elm_layers", cfg.kan.elm_layers},
                {"mlp_layers", cfg.kan.mlp_layers},
                {"d", cfg.kan.d}};
    j["ian"] = {{"conv_channels", cfg.ian.conv_channels},
                {"kernel_size", cfg.ian.kernel_size},
                {"fc_layers", cfg.ian.fc_layers},
                {"d", cfg.ian.d},
                {"m", cfg.ian.m}};
    j["bc_kind"] = truth::to_string(cfg.bc_kind);
    return j;
}

std::vector<int> int_list(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        fail(ErrorKind::Corrupt,
             "checkpoint: " + where + " must be a non-empty array");
    std::vector<int> v;
    for (const auto& e : j) {
        if (!e.is_number_integer())
            fail(ErrorKind::Corrupt, "checkpoint: " + where + " must be integers");
        v.push_back(e.get<int>());
    }
    return v;
}

int int_field(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number_integer())
        fail(ErrorKind::Corrupt, "checkpoint: " + where + " must be an integer");
    return j.get<int>();
}

// Rejects keys outside `allowed`: the checksum covers a canonical
// re-serialization that would silently drop them.
void reject_foreign_keys(const nlohmann::json& j,
                         std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed) known = known || item.key() == k;
        if (!known)
            fail(ErrorKind::Corrupt, "checkpoint: unexpected key " + where +
                                         "." + item.key());
    }
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    if (!j.is_object() || !j.contains("kan") || !j.contains("ian") ||
        !j.contains("bc_kind"))
        fail(ErrorKind::Corrupt, "checkpoint: malformed config block");
    const auto& jk = j["kan"];
    const auto& ji = j["ian"];
    if (!jk.is_object() || !ji.is_object())
        fail(ErrorKind::Corrupt, "checkpoint: malformed config block");
    reject_foreign_keys(j, {"kan", "ian", "bc_kind"}, "config");
    reject_foreign_keys(jk, {"elm_layers", "mlp_layers", "d"}, "config.kan");
    reject_foreign_keys(
        ji, {"conv_channels", "kernel_size", "fc_layers", "d", "m"},
        "config.ian");
    cfg.kan.elm_layers = int_list(jk.at("elm_layers"), "config.kan.elm_layers");
    cfg.kan.mlp_layers = int_list(jk.at("mlp_layers"), "config.kan.mlp_layers");
    cfg.kan.d = int_field(jk.at("d"), "config.kan.d");
    cfg.ian.conv_channels =
        int_list(ji.at("conv_channels"), "config.ian.conv_channels");
    cfg.ian.kernel_size = int_field(ji.at("kernel_size"), "config.ian.kernel_size");
    cfg.ian.fc_layers = int_list(ji.at("fc_layers"), "config.ian.fc_layers");
    cfg.ian.d = int_field(ji.at("d"), "config.ian.d");
    cfg.ian.m = int_field(ji.at("m"), "config.ian.m");
    if (!j["bc_kind"].is_string())
        fail(ErrorKind::Corrupt, "checkpoint: config.bc_kind must be a string");
    cfg.bc_kind = truth::parse_bc_kind(j["bc_kind"].get<std::string>());
    return cfg;
}

// The canonical serialization covered by the checksum: every field except
// the checksum itself, compact form, fixed key order.
std::string canonical_dump(const ModelConfig& cfg, double lambda,
                           const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& arrays) {
    ordered_json j;
    j["format_version"] = kCheckpointVersion;
    j["config"] = config_to_json(cfg);
    j["elm_seed"] = cfg.kan.elm_seed;
    j["lambda"] = lambda;
    ordered_json ja;
    for (size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "lambda") continue;
        ja[names[i]] = arrays[i];
    }
    j["arrays"] = std::move(ja);
    return j.dump();
}

}  // namespace

std::string FienoModel::to_json() const {
    const std::string canon =
        canonical_dump(cfg_, lambda_value(), names_, snapshot());
    const uint32_t crc = crc32_of(canon);
    // Splice the checksum in as the final key of the same canonical text.
    std::string out = canon;
    out.pop_back();  // trailing '}'
    out += ",\"checksum\":" + std::to_string(crc) + "}";
    return out;
}

FienoModel FienoModel::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Corrupt,
             std::string("checkpoint: unparseable or truncated: ") + e.what());
    }
    if (!j.is_object())
        fail(ErrorKind::Corrupt, "checkpoint: top level must be an object");
    for (const char* key :
         {"format_version", "config", "elm_seed", "lambda", "arrays",
          "checksum"})
        if (!j.contains(key))
            fail(ErrorKind::Corrupt,
                 std::string("checkpoint: missing key ") + key);
    if (!j["format_version"].is_number_integer() ||
        j["format_version"].get<int>() != kCheckpointVersion)
        fail(ErrorKind::Version,
             "checkpoint: unsupported format_version (expected " +
                 std::to_string(kCheckpointVersion) + ")");
    reject_foreign_keys(j,
                        {"format_version", "config", "elm_seed", "lambda",
                         "arrays", "checksum"},
                        "checkpoint");

    ModelConfig cfg;
    try {
        cfg = config_from_json(j["config"]);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Corrupt,
             std::string("checkpoint: malformed config block: ") + e.what());
    }
    if (!j["elm_seed"].is_number_unsigned())
        fail(ErrorKind::Corrupt, "checkpoint: elm_seed must be unsigned");
    cfg.kan.elm_seed = j["elm_seed"].get<uint64_t>();
    if (!j["lambda"].is_number())
        fail(ErrorKind::Corrupt, "checkpoint: lambda must be a number");
    const double lambda = j["lambda"].get<double>();
    if (!j["checksum"].is_number_unsigned())
        fail(ErrorKind::Corrupt, "checkpoint: checksum must be unsigned");
    const uint32_t stored_crc = j["checksum"].get<uint32_t>();

    // Rebuild the model skeleton, then fill arrays by canonical name.
    FienoModel model(cfg, /*param_seed=*/0);
    model.lambda_.data()[0] = lambda;

    const auto& ja = j["arrays"];
    if (!ja.is_object())
        fail(ErrorKind::Corrupt, "checkpoint: arrays must be an object");
    size_t expected = 0;
    for (size_t i = 0; i < model.names_.size(); ++i) {
        if (model.names_[i] == "lambda") continue;
        ++expected;
        if (!ja.contains(model.names_[i]))
            fail(ErrorKind::Corrupt,
                 "checkpoint: missing array " + model.names_[i]);
        const auto& arr = ja[model.names_[i]];
        auto& dst = model.params_[i].data();
        if (!arr.is_array() || arr.size() != dst.size())
            fail(ErrorKind::Corrupt,
                 "checkpoint: array " + model.names_[i] + " has wrong length");
        for (size_t e = 0; e < dst.size(); ++e) {
            if (!arr[e].is_number())
                fail(ErrorKind::Corrupt,
                     "checkpoint: array " + model.names_[i] +
                         " holds a non-number");
            dst[e] = arr[e].get<double>();
        }
    }
    if (ja.size() != expected)
        fail(ErrorKind::Corrupt, "checkpoint: unexpected extra arrays");

    const std::string canon = canonical_dump(model.cfg_, model.lambda_value(),
                                             model.names_, model.snapshot());
    if (crc32_of(canon) != stored_crc)
        fail(ErrorKind::Corrupt, "checkpoint: checksum mismatch");
    return model;
}

void FienoModel::save(const std::string& path) const {
    write_file(path, to_json());
}

FienoModel FienoModel::load(const std::string& path) {
    return from_json(read_file(path));
}

}  // namespace fieno::model
