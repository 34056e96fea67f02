#include "config.hpp"

#include <charconv>
#include <cstdlib>
#include <json.hpp>

namespace fieno::config {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    fail(ErrorKind::Validation, "config: " + path + ": " + what);
}

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) known = true;
        if (!known) bad(path.empty() ? it.key() : path + "." + it.key(),
                        "unknown key");
    }
}

const json* get(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) bad(path, "must be a string");
    return j.get<std::string>();
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) bad(path, "must be a number");
    return j.get<double>();
}

int64_t get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) bad(path, "must be an integer");
    return j.get<int64_t>();
}

uint64_t get_uint(const json& j, const std::string& path) {
    if (!j.is_number_unsigned()) bad(path, "must be a non-negative integer");
    return j.get<uint64_t>();
}

std::vector<int> get_int_list(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) bad(path, "must be a non-empty array");
    std::vector<int> v;
    for (size_t i = 0; i < j.size(); ++i)
        v.push_back(static_cast<int>(
            get_int(j[i], path + "[" + std::to_string(i) + "]")));
    return v;
}

std::vector<int64_t> get_int64_list(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) bad(path, "must be a non-empty array");
    std::vector<int64_t> v;
    for (size_t i = 0; i < j.size(); ++i)
        v.push_back(get_int(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

void parse_pde(const json& j, truth::PdeSpec& pde) {
    if (!j.is_object()) bad("pde", "must be an object");
    reject_unknown(j, "pde", {"equation", "bc_kind", "truth_mode", "helmholtz_k"});
    const json* eq = get(j, "equation");
    if (eq == nullptr) bad("pde.equation", "missing required field");
    pde.equation = truth::parse_equation(get_string(*eq, "pde.equation"));
    if (const json* v = get(j, "bc_kind"))
        pde.bc_kind = truth::parse_bc_kind(get_string(*v, "pde.bc_kind"));
    if (const json* v = get(j, "helmholtz_k"))
        pde.helmholtz_k = get_number(*v, "pde.helmholtz_k");
    if (const json* v = get(j, "truth_mode")) {
        const std::string s = get_string(*v, "pde.truth_mode");
        pde.truth_mode = resolve_truth_mode(s, pde.equation, pde.bc_kind);
    } else {
        pde.truth_mode = default_truth_mode(pde.equation, pde.bc_kind);
    }
}

void parse_data(const json& j, DataConfig& d) {
    if (!j.is_object()) bad("data", "must be an object");
    reject_unknown(j, "data", {"shape_id", "m_boundary", "n_interior"});
    if (const json* v = get(j, "shape_id"))
        d.shape_id = get_string(*v, "data.shape_id");
    if (const json* v = get(j, "m_boundary"))
        d.m_boundary = get_int(*v, "data.m_boundary");
    if (const json* v = get(j, "n_interior"))
        d.n_interior = get_int(*v, "data.n_interior");
    if (d.m_boundary < 1) bad("data.m_boundary", "must be >= 1");
    if (d.n_interior < 1) bad("data.n_interior", "must be >= 1");
}

void parse_kan(const json& j, model::KanConfig& k) {
    if (!j.is_object()) bad("kan", "must be an object");
    reject_unknown(j, "kan", {"elm_layers", "mlp_layers", "d"});
    if (const json* v = get(j, "elm_layers"))
        k.elm_layers = get_int_list(*v, "kan.elm_layers");
    if (const json* v = get(j, "mlp_layers"))
        k.mlp_layers = get_int_list(*v, "kan.mlp_layers");
    if (const json* v = get(j, "d"))
        k.d = static_cast<int>(get_int(*v, "kan.d"));
}

void parse_ian(const json& j, model::IanConfig& i) {
    if (!j.is_object()) bad("ian", "must be an object");
    reject_unknown(j, "ian",
                   {"conv_channels", "kernel_size", "fc_layers", "d", "m"});
    if (const json* v = get(j, "conv_channels"))
        i.conv_channels = get_int_list(*v, "ian.conv_channels");
    if (const json* v = get(j, "kernel_size"))
        i.kernel_size = static_cast<int>(get_int(*v, "ian.kernel_size"));
    if (const json* v = get(j, "fc_layers"))
        i.fc_layers = get_int_list(*v, "ian.fc_layers");
    if (const json* v = get(j, "d")) i.d = static_cast<int>(get_int(*v, "ian.d"));
    if (const json* v = get(j, "m")) i.m = static_cast<int>(get_int(*v, "ian.m"));
}

void parse_train(const json& j, trainer::TrainConfig& t) {
    if (!j.is_object()) bad("train", "must be an object");
    reject_unknown(j, "train",
                   {"steps", "lr", "m_boundary", "n_interior", "dense_boundary",
                    "early_stop_patience", "eval_every"});
    if (const json* v = get(j, "steps")) t.steps = get_int(*v, "train.steps");
    if (const json* v = get(j, "lr")) t.lr = get_number(*v, "train.lr");
    if (const json* v = get(j, "m_boundary"))
        t.m_boundary = static_cast<int>(get_int(*v, "train.m_boundary"));
    if (const json* v = get(j, "n_interior"))
        t.n_interior = get_int(*v, "train.n_interior");
    if (const json* v = get(j, "dense_boundary"))
        t.dense_boundary = get_int(*v, "train.dense_boundary");
    if (const json* v = get(j, "early_stop_patience"))
        t.early_stop_patience = get_int(*v, "train.early_stop_patience");
    if (const json* v = get(j, "eval_every"))
        t.eval_every = get_int(*v, "train.eval_every");
    t.validate();
}

void parse_grid(const json& j, GridConfig& g) {
    if (!j.is_object()) bad("grid", "must be an object");
    reject_unknown(j, "grid",
                   {"equations", "bc_kinds", "boundaries", "n_interior",
                    "protocol", "finetune_steps", "holdout_points",
                    "truth_mode"});
    if (const json* v = get(j, "equations")) {
        if (!v->is_array() || v->empty()) bad("grid.equations", "must be a non-empty array");
        g.equations.clear();
        for (size_t i = 0; i < v->size(); ++i)
            g.equations.push_back(truth::parse_equation(get_string(
                (*v)[i], "grid.equations[" + std::to_string(i) + "]")));
    }
    if (const json* v = get(j, "bc_kinds")) {
        if (!v->is_array() || v->empty()) bad("grid.bc_kinds", "must be a non-empty array");
        g.bc_kinds.clear();
        for (size_t i = 0; i < v->size(); ++i)
            g.bc_kinds.push_back(truth::parse_bc_kind(get_string(
                (*v)[i], "grid.bc_kinds[" + std::to_string(i) + "]")));
    }
    if (const json* v = get(j, "boundaries")) {
        if (!v->is_array()) bad("grid.boundaries", "must be an array");
        g.boundaries.clear();
        for (size_t i = 0; i < v->size(); ++i) {
            const std::string id = get_string(
                (*v)[i], "grid.boundaries[" + std::to_string(i) + "]");
            geom::boundary_by_id(id);  // existence check
            g.boundaries.push_back(id);
        }
    }
    if (const json* v = get(j, "n_interior"))
        g.n_interior = get_int64_list(*v, "grid.n_interior");
    if (const json* v = get(j, "protocol")) {
        g.protocol = get_string(*v, "grid.protocol");
        if (g.protocol != "few-shot" && g.protocol != "zero-shot")
            bad("grid.protocol", "must be \"few-shot\" or \"zero-shot\"");
    }
    if (const json* v = get(j, "finetune_steps"))
        g.finetune_steps = get_int(*v, "grid.finetune_steps");
    if (const json* v = get(j, "holdout_points"))
        g.holdout_points = get_int(*v, "grid.holdout_points");
    if (const json* v = get(j, "truth_mode")) {
        g.truth_mode = get_string(*v, "grid.truth_mode");
        if (g.truth_mode != "auto") truth::parse_truth_mode(g.truth_mode);
    }
    if (g.finetune_steps < 1) bad("grid.finetune_steps", "must be >= 1");
    if (g.holdout_points < 1) bad("grid.holdout_points", "must be >= 1");
    for (int64_t n : g.n_interior)
        if (n < 1) bad("grid.n_interior", "entries must be >= 1");
}

}  // namespace

truth::TruthMode default_truth_mode(truth::Equation eq, truth::BcKind bc) {
    if (eq == truth::Equation::Laplace && bc == truth::BcKind::Dirichlet)
        return truth::TruthMode::Analytic;
    return truth::TruthMode::Manufactured;
}

truth::TruthMode resolve_truth_mode(const std::string& mode,
                                    truth::Equation eq, truth::BcKind bc) {
    if (mode == "auto") return default_truth_mode(eq, bc);
    return truth::parse_truth_mode(mode);
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Validation,
             std::string("config: bad JSON: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::Validation, "config: top level must be an object");
    reject_unknown(j, "",
                   {"seed", "output_dir", "pde", "data", "kan", "ian", "train",
                    "grid", "seeds"});

    ExperimentConfig cfg;
    if (const json* v = get(j, "seed")) cfg.seed = get_uint(*v, "seed");
    if (const json* v = get(j, "output_dir"))
        cfg.output_dir = get_string(*v, "output_dir");

    const json* pde = get(j, "pde");
    if (pde == nullptr)
        fail(ErrorKind::Validation, "config: pde.equation: missing required field");
    parse_pde(*pde, cfg.pde);

    if (const json* v = get(j, "data")) parse_data(*v, cfg.data);
    if (const json* v = get(j, "kan")) parse_kan(*v, cfg.model.kan);
    if (const json* v = get(j, "ian")) parse_ian(*v, cfg.model.ian);
    if (const json* v = get(j, "train")) parse_train(*v, cfg.train);
    if (const json* v = get(j, "grid")) parse_grid(*v, cfg.grid);
    if (const json* v = get(j, "seeds")) {
        if (!v->is_array() || v->empty())
            bad("seeds", "must be a non-empty array");
        cfg.seeds.clear();
        for (size_t i = 0; i < v->size(); ++i)
            cfg.seeds.push_back(
                get_uint((*v)[i], "seeds[" + std::to_string(i) + "]"));
    }

    if (const char* env = std::getenv("FIENO_SEED")) {
        uint64_t v = 0;
        const char* end = env + std::char_traits<char>::length(env);
        const auto [ptr, ec] = std::from_chars(env, end, v, 10);
        if (ec != std::errc{} || ptr != end)
            fail(ErrorKind::Validation,
                 "config: FIENO_SEED must be a non-negative integer");
        cfg.seed = v;
    }

    cfg.model.bc_kind = cfg.pde.bc_kind;
    cfg.model.validate();
    cfg.pde.validate();
    geom::boundary_by_id(cfg.data.shape_id);
    if (cfg.model.ian.m != cfg.train.m_boundary)
        fail(ErrorKind::Validation,
             "config: ian.m and train.m_boundary must agree");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config(read_file(path));
}

}  // namespace fieno::config
