#include "trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace fieno::trainer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// First k of a seeded permutation (partial Fisher-Yates).
std::vector<size_t> draw_without_replacement(size_t pool, size_t k,
                                             uint64_t seed) {
    std::vector<size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), size_t{0});
    Rng rng(seed);
    for (size_t i = 0; i < k; ++i) {
        const size_t j = i + rng.uniform_index(pool - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

std::vector<geom::Point2> supervision_points(const truth::Dataset& data,
                                             int64_t n) {
    std::vector<geom::Point2> pts;
    pts.reserve(n);
    for (int64_t i = 0; i < n; ++i) pts.push_back(data.interior[i].point);
    return pts;
}

}  // namespace

void TrainConfig::validate() const {
    if (steps < 1) fail(ErrorKind::Validation, "train.steps must be >= 1");
    if (!(lr > 0.0)) fail(ErrorKind::Validation, "train.lr must be > 0");
    if (m_boundary < 1)
        fail(ErrorKind::Validation, "train.m_boundary must be >= 1");
    if (n_interior < 1)
        fail(ErrorKind::Validation, "train.n_interior must be >= 1");
    if (dense_boundary < m_boundary)
        fail(ErrorKind::Validation,
             "train.dense_boundary must be >= train.m_boundary");
    if (early_stop_patience < 1)
        fail(ErrorKind::Validation, "train.early_stop_patience must be >= 1");
    if (eval_every < 1)
        fail(ErrorKind::Validation, "train.eval_every must be >= 1");
}

TrainResult train(model::FienoModel& model, const truth::Dataset& data,
                  const TrainConfig& cfg, const truth::Dataset* holdout) {
    cfg.validate();
    if (static_cast<int64_t>(data.interior.size()) < cfg.n_interior)
        fail(ErrorKind::Validation,
             "train: dataset has fewer interior points than train.n_interior");
    if (static_cast<int64_t>(data.boundary.size()) < cfg.dense_boundary)
        fail(ErrorKind::Validation,
             "train: dataset has fewer boundary samples than "
             "train.dense_boundary");
    if (model.config().ian.m != cfg.m_boundary)
        fail(ErrorKind::Validation,
             "train: ian.m and train.m_boundary must agree");

    const auto points = supervision_points(data, cfg.n_interior);
    std::vector<double> truths(cfg.n_interior);
    for (int64_t i = 0; i < cfg.n_interior; ++i)
        truths[i] = data.interior[i].true_value;

    auto params = model.trainable_params();
    ad::AdamState adam;
    TrainResult result;
    result.best_loss = std::numeric_limits<double>::infinity();
    auto best_snapshot = model.snapshot();

    for (int64_t step = 1; step <= cfg.steps; ++step) {
        const auto idx = draw_without_replacement(
            cfg.dense_boundary, cfg.m_boundary,
            derive_seed(cfg.seed, "draw", {static_cast<uint64_t>(step)}));
        std::vector<geom::BoundarySample> batch;
        batch.reserve(idx.size());
        for (size_t i : idx) batch.push_back(data.boundary[i]);

        ad::Tensor pred = model.forward(batch, points);
        ad::Tensor diff = ad::sub(
            pred, ad::Tensor::constant(truths,
                                       {static_cast<int>(truths.size())}));
        ad::Tensor loss = ad::mean(ad::mul(diff, diff));
        const double loss_v = loss.item();
        if (!std::isfinite(loss_v))
            fail(ErrorKind::Numeric,
                 "train: loss diverged (non-finite) at step " +
                     std::to_string(step));

        if (loss_v < result.best_loss) {
            result.best_loss = loss_v;
            result.best_step = step;
            // In-place copy: improving steps are frequent early on and the
            // parameter block is large.
            for (size_t i = 0; i < params.size(); ++i) {
                const auto& src = params[i].data();
                std::copy(src.begin(), src.end(), best_snapshot[i].begin());
            }
        }

        for (auto& p : params) p.zero_grad();
        ad::backward(loss);
        ad::adam_step(params, adam, cfg.lr);

        LossPoint lp{step, loss_v, kNaN};
        if (holdout != nullptr && step % cfg.eval_every == 0)
            lp.holdout_mse = evaluate(model, *holdout);
        result.history.push_back(lp);
        result.steps_run = step;

        if (step - result.best_step >= cfg.early_stop_patience) break;
    }

    model.restore(best_snapshot);
    return result;
}

double evaluate(model::FienoModel& model, const truth::Dataset& data) {
    const int m = model.config().ian.m;
    if (static_cast<int>(data.boundary.size()) < m)
        fail(ErrorKind::Validation,
             "evaluate: dataset has fewer boundary samples than ian.m");
    if (data.interior.empty())
        fail(ErrorKind::Validation, "evaluate: dataset has no interior points");
    std::vector<geom::BoundarySample> boundary(data.boundary.begin(),
                                               data.boundary.begin() + m);
    std::vector<geom::Point2> pts;
    pts.reserve(data.interior.size());
    for (const auto& s : data.interior) pts.push_back(s.point);
    const auto preds = model.predict(boundary, pts);
    double acc = 0.0;
    for (size_t i = 0; i < preds.size(); ++i) {
        const double d = preds[i] - data.interior[i].true_value;
        acc += d * d;
    }
    return acc / static_cast<double>(preds.size());
}

std::string loss_csv(const std::vector<LossPoint>& history) {
    std::ostringstream out;
    out << "step,train_mse,holdout_mse\n";
    for (const auto& lp : history) {
        out << lp.step << ',' << fmt_g17(lp.train_mse) << ',';
        if (std::isfinite(lp.holdout_mse)) out << fmt_g17(lp.holdout_mse);
        out << '\n';
    }
    return out.str();
}

}  // namespace fieno::trainer
