// C API: thin translation layer over the C++ core. Exceptions become
// status codes; messages land in a thread-local buffer.

#include "fieno/fieno.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "bench.hpp"
#include "common.hpp"
#include "config.hpp"
#include "geometry.hpp"
#include "model.hpp"
#include "trainer.hpp"
#include "truth.hpp"
#include "verify.hpp"

struct fieno_dataset {
    fieno::truth::Dataset ds;
};

struct fieno_model {
    fieno::model::FienoModel impl;
};

namespace {

using fieno::Error;
using fieno::ErrorKind;

thread_local std::string g_last_error;

fieno_status status_of(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation: return FIENO_ERR_VALIDATION;
        case ErrorKind::Numeric: return FIENO_ERR_NUMERIC;
        case ErrorKind::Io: return FIENO_ERR_IO;
        case ErrorKind::Version: return FIENO_ERR_VERSION;
        case ErrorKind::Corrupt: return FIENO_ERR_CORRUPT;
        case ErrorKind::Internal: return FIENO_ERR_INTERNAL;
    }
    return FIENO_ERR_INTERNAL;
}

template <typename Fn>
fieno_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return FIENO_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return FIENO_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return FIENO_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return FIENO_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool cond, const char* what) {
    if (!cond) fieno::fail(ErrorKind::Validation, what);
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        fieno::fail(ErrorKind::Io,
                    "cannot create directory '" + dir + "': " + ec.message());
}

// Deterministic per-purpose seeds so one config seed fixes the whole run.
constexpr uint64_t kVerifySeed = 1;

}  // namespace

extern "C" {

const char* fieno_version(void) { return "0.1.0"; }

const char* fieno_last_error(void) { return g_last_error.c_str(); }

void fieno_string_free(char* s) { std::free(s); }

fieno_status fieno_config_validate(const char* config_json) {
    return guarded([&] {
        require(config_json != nullptr, "config_json must not be NULL");
        fieno::config::parse_config(config_json);
    });
}

fieno_status fieno_gen_data(const char* config_json, const char* out_dir,
                            char** path_out) {
    return guarded([&] {
        require(config_json != nullptr, "config_json must not be NULL");
        require(out_dir != nullptr, "out_dir must not be NULL");
        const auto cfg = fieno::config::parse_config(config_json);
        ensure_dir(out_dir);
        const fieno::truth::Dataset ds = fieno::truth::build_dataset(
            cfg.data.shape_id, cfg.pde, cfg.data.m_boundary,
            cfg.data.n_interior, cfg.seed);
        const std::string path =
            std::string(out_dir) + "/dataset_" + ds.shape_id + "_" +
            fieno::truth::to_string(ds.pde.equation) + "_" +
            fieno::truth::to_string(ds.pde.bc_kind) + ".json";
        fieno::truth::save_dataset(ds, path);
        const auto& shape = fieno::geom::boundary_by_id(cfg.data.shape_id);
        fieno::write_file(
            std::string(out_dir) + "/boundary_" + cfg.data.shape_id + ".csv",
            fieno::geom::boundary_csv(shape, 512));
        if (path_out != nullptr) *path_out = dup_string(path);
    });
}

fieno_status fieno_dataset_load(const char* path, fieno_dataset** out) {
    return guarded([&] {
        require(path != nullptr, "path must not be NULL");
        require(out != nullptr, "out must not be NULL");
        *out = new fieno_dataset{fieno::truth::load_dataset(path)};
    });
}

fieno_status fieno_dataset_save(const fieno_dataset* ds, const char* path) {
    return guarded([&] {
        require(ds != nullptr, "dataset must not be NULL");
        require(path != nullptr, "path must not be NULL");
        fieno::truth::save_dataset(ds->ds, path);
    });
}

void fieno_dataset_free(fieno_dataset* ds) { delete ds; }

int64_t fieno_dataset_boundary_count(const fieno_dataset* ds) {
    return ds == nullptr ? 0 : static_cast<int64_t>(ds->ds.boundary.size());
}

int64_t fieno_dataset_interior_count(const fieno_dataset* ds) {
    return ds == nullptr ? 0 : static_cast<int64_t>(ds->ds.interior.size());
}

fieno_status fieno_dataset_interior(const fieno_dataset* ds, double* xy,
                                    double* values) {
    return guarded([&] {
        require(ds != nullptr, "dataset must not be NULL");
        for (size_t i = 0; i < ds->ds.interior.size(); ++i) {
            const auto& s = ds->ds.interior[i];
            if (xy != nullptr) {
                xy[2 * i] = s.point.x;
                xy[2 * i + 1] = s.point.y;
            }
            if (values != nullptr) values[i] = s.true_value;
        }
    });
}

fieno_status fieno_boundary_export_csv(const char* boundary_id,
                                       int64_t n_points, const char* path) {
    return guarded([&] {
        require(boundary_id != nullptr, "boundary_id must not be NULL");
        require(path != nullptr, "path must not be NULL");
        const auto& shape = fieno::geom::boundary_by_id(boundary_id);
        fieno::write_file(path, fieno::geom::boundary_csv(shape, n_points));
    });
}

fieno_status fieno_model_load(const char* path, fieno_model** out) {
    return guarded([&] {
        require(path != nullptr, "path must not be NULL");
        require(out != nullptr, "out must not be NULL");
        *out = new fieno_model{fieno::model::FienoModel::load(path)};
    });
}

fieno_status fieno_model_save(const fieno_model* m, const char* path) {
    return guarded([&] {
        require(m != nullptr, "model must not be NULL");
        require(path != nullptr, "path must not be NULL");
        m->impl.save(path);
    });
}

void fieno_model_free(fieno_model* m) { delete m; }

fieno_status fieno_model_predict(const fieno_model* m, const fieno_dataset* ds,
                                 double* preds) {
    return guarded([&] {
        require(m != nullptr, "model must not be NULL");
        require(ds != nullptr, "dataset must not be NULL");
        require(preds != nullptr, "preds must not be NULL");
        auto& impl = const_cast<fieno::model::FienoModel&>(m->impl);
        const int mb = impl.config().ian.m;
        require(static_cast<int64_t>(ds->ds.boundary.size()) >= mb,
                "dataset has fewer boundary samples than the model expects");
        std::vector<fieno::geom::BoundarySample> boundary(
            ds->ds.boundary.begin(), ds->ds.boundary.begin() + mb);
        std::vector<fieno::geom::Point2> pts;
        pts.reserve(ds->ds.interior.size());
        for (const auto& s : ds->ds.interior) pts.push_back(s.point);
        const std::vector<double> out = impl.predict(boundary, pts);
        std::memcpy(preds, out.data(), out.size() * sizeof(double));
    });
}

fieno_status fieno_train(const char* config_json, const char* data_path,
                         const char* out_dir) {
    return guarded([&] {
        require(config_json != nullptr, "config_json must not be NULL");
        require(data_path != nullptr, "data_path must not be NULL");
        require(out_dir != nullptr, "out_dir must not be NULL");
        const auto cfg = fieno::config::parse_config(config_json);
        const fieno::truth::Dataset ds = fieno::truth::load_dataset(data_path);
        if (ds.pde.bc_kind != cfg.model.bc_kind)
            fieno::fail(ErrorKind::Validation,
                        "dataset boundary-condition kind does not match the "
                        "configured model");
        ensure_dir(out_dir);

        fieno::model::ModelConfig mcfg = cfg.model;
        mcfg.kan.elm_seed = fieno::derive_seed(cfg.seed, "elm");
        fieno::model::FienoModel model(mcfg,
                                       fieno::derive_seed(cfg.seed, "params"));
        fieno::trainer::TrainConfig tcfg = cfg.train;
        tcfg.seed = fieno::derive_seed(cfg.seed, "train");
        const fieno::trainer::TrainResult res =
            fieno::trainer::train(model, ds, tcfg);
        model.save(std::string(out_dir) + "/checkpoint.json");
        fieno::write_file(std::string(out_dir) + "/loss.csv",
                          fieno::trainer::loss_csv(res.history));
    });
}

fieno_status fieno_eval(const char* checkpoint_path, const char* data_path,
                        const char* protocol, const char* results_csv,
                        double* mse_out) {
    return guarded([&] {
        require(checkpoint_path != nullptr, "checkpoint_path must not be NULL");
        require(data_path != nullptr, "data_path must not be NULL");
        require(protocol != nullptr, "protocol must not be NULL");
        const std::string proto = protocol;
        if (proto != "zero-shot" && proto != "few-shot")
            fieno::fail(ErrorKind::Validation,
                        "protocol must be \"zero-shot\" or \"few-shot\"");
        fieno::model::FienoModel model =
            fieno::model::FienoModel::load(checkpoint_path);
        const fieno::truth::Dataset ds = fieno::truth::load_dataset(data_path);
        if (ds.pde.bc_kind != model.config().bc_kind)
            fieno::fail(ErrorKind::Validation,
                        "dataset boundary-condition kind does not match the "
                        "checkpoint");

        const auto t0 = std::chrono::steady_clock::now();
        double mse = 0.0;
        if (proto == "zero-shot") {
            mse = fieno::trainer::evaluate(model, ds);
        } else {
            fieno::trainer::TrainConfig fcfg;
            fcfg.steps = 500;
            fcfg.m_boundary = model.config().ian.m;
            fcfg.n_interior = static_cast<int64_t>(ds.interior.size());
            fcfg.dense_boundary = static_cast<int64_t>(ds.boundary.size());
            fcfg.seed = fieno::derive_seed(ds.seed, "finetune");
            fieno::trainer::train(model, ds, fcfg);
            const fieno::truth::Dataset holdout = fieno::truth::build_dataset(
                ds.shape_id, ds.pde,
                static_cast<int64_t>(ds.boundary.size()), 500,
                fieno::derive_seed(ds.seed, "holdout"));
            mse = fieno::trainer::evaluate(model, holdout);
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();

        if (results_csv != nullptr) {
            fieno::bench::ResultRecord rec{
                fieno::truth::to_string(ds.pde.equation),
                fieno::truth::to_string(ds.pde.bc_kind),
                ds.shape_id,
                static_cast<int64_t>(ds.interior.size()),
                ds.seed,
                proto,
                fieno::truth::to_string(ds.pde.truth_mode),
                mse,
                wall};
            std::vector<fieno::bench::ResultRecord> records;
            if (std::filesystem::exists(results_csv))
                records =
                    fieno::bench::parse_results_csv(fieno::read_file(results_csv));
            records.push_back(rec);
            fieno::write_file(results_csv, fieno::bench::results_csv(records));
        }
        if (mse_out != nullptr) *mse_out = mse;
    });
}

fieno_status fieno_run_grid(const char* config_json, const char* out_dir,
                            int workers) {
    return guarded([&] {
        require(config_json != nullptr, "config_json must not be NULL");
        require(out_dir != nullptr, "out_dir must not be NULL");
        const auto cfg = fieno::config::parse_config(config_json);
        ensure_dir(out_dir);
        const auto records = fieno::bench::run_grid(cfg, workers);
        fieno::write_file(std::string(out_dir) + "/results.csv",
                          fieno::bench::results_csv(records));
    });
}

fieno_status fieno_emit_table(const char* results_csv, const char* equation,
                              const char* bc_kind, char** text_out,
                              char** csv_out) {
    return guarded([&] {
        require(results_csv != nullptr, "results_csv must not be NULL");
        require(equation != nullptr, "equation must not be NULL");
        require(bc_kind != nullptr, "bc_kind must not be NULL");
        const auto records =
            fieno::bench::parse_results_csv(fieno::read_file(results_csv));
        const auto table = fieno::bench::emit_table(
            records, fieno::truth::parse_equation(equation),
            fieno::truth::parse_bc_kind(bc_kind));
        if (text_out != nullptr) *text_out = dup_string(table.text);
        if (csv_out != nullptr) *csv_out = dup_string(table.csv);
    });
}

fieno_status fieno_emit_plots(const char* checkpoint_path,
                              const char* data_path, const char* out_dir) {
    return guarded([&] {
        require(checkpoint_path != nullptr, "checkpoint_path must not be NULL");
        require(data_path != nullptr, "data_path must not be NULL");
        require(out_dir != nullptr, "out_dir must not be NULL");
        fieno::model::FienoModel model =
            fieno::model::FienoModel::load(checkpoint_path);
        const fieno::truth::Dataset ds = fieno::truth::load_dataset(data_path);
        ensure_dir(out_dir);
        fieno::bench::emit_plots(model, ds, out_dir);
    });
}

fieno_status fieno_verify(const char* suite, char** report_out) {
    return guarded([&] {
        require(suite != nullptr, "suite must not be NULL");
        std::vector<fieno::verify::SuiteResult> results;
        if (std::string(suite) == "all")
            results = fieno::verify::run_all(kVerifySeed);
        else
            results.push_back(fieno::verify::run_suite(suite, kVerifySeed));
        if (report_out != nullptr)
            *report_out = dup_string(fieno::verify::report(results));
        for (const auto& r : results)
            if (!r.passed())
                fieno::fail(ErrorKind::Numeric,
                            "verification suite '" + r.suite +
                                "' has failing checks");
    });
}

}  // extern "C"
