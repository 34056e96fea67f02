// Command-line front end. Everything substantive goes through the C API in
// fieno/fieno.h; this file only parses arguments and moves bytes.

#include <fieno/fieno.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace {

// 0 success, 2 bad input (validation/io/version/corrupt), 3 numerical
// failure, 1 internal.
int exit_code(fieno_status s) {
    switch (s) {
        case FIENO_OK: return 0;
        case FIENO_ERR_NUMERIC: return 3;
        case FIENO_ERR_VALIDATION:
        case FIENO_ERR_IO:
        case FIENO_ERR_VERSION:
        case FIENO_ERR_CORRUPT: return 2;
        case FIENO_ERR_INTERNAL: break;
    }
    return 1;
}

int report_failure(fieno_status s) {
    std::fprintf(stderr, "error: %s\n", fieno_last_error());
    return exit_code(s);
}

std::optional<std::string> read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "error: cannot read '%s'\n", path.c_str());
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_gen_data(const std::string& config_path, const std::string& out_dir) {
    const auto config = read_text(config_path);
    if (!config) return 2;
    char* path = nullptr;
    const fieno_status s =
        fieno_gen_data(config->c_str(), out_dir.c_str(), &path);
    if (s != FIENO_OK) return report_failure(s);
    std::printf("wrote %s\n", path);
    fieno_string_free(path);
    return 0;
}

int run_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_dir) {
    const auto config = read_text(config_path);
    if (!config) return 2;
    const fieno_status s =
        fieno_train(config->c_str(), data_path.c_str(), out_dir.c_str());
    if (s != FIENO_OK) return report_failure(s);
    std::printf("wrote %s/checkpoint.json and %s/loss.csv\n", out_dir.c_str(),
                out_dir.c_str());
    return 0;
}

int run_eval(const std::string& checkpoint, const std::string& data_path,
             const std::string& protocol, const std::string& results) {
    double mse = 0.0;
    const fieno_status s =
        fieno_eval(checkpoint.c_str(), data_path.c_str(), protocol.c_str(),
                   results.c_str(), &mse);
    if (s != FIENO_OK) return report_failure(s);
    std::printf("%.17g\n", mse);
    return 0;
}

int run_grid(const std::string& config_path, const std::string& out_dir,
             int workers) {
    const auto config = read_text(config_path);
    if (!config) return 2;
    const fieno_status s =
        fieno_run_grid(config->c_str(), out_dir.c_str(), workers);
    if (s != FIENO_OK) return report_failure(s);
    std::printf("wrote %s/results.csv\n", out_dir.c_str());
    return 0;
}

int run_table(const std::string& results, const std::string& equation,
              const std::string& bc) {
    char* text = nullptr;
    char* csv = nullptr;
    const fieno_status s = fieno_emit_table(results.c_str(), equation.c_str(),
                                            bc.c_str(), &text, &csv);
    if (s != FIENO_OK) return report_failure(s);
    std::fputs(text, stdout);

    std::filesystem::path dir = std::filesystem::path(results).parent_path();
    if (dir.empty()) dir = ".";
    const std::string csv_path =
        (dir / ("table_" + equation + "_" + bc + ".csv")).string();
    std::ofstream out(csv_path, std::ios::binary);
    int rc = 0;
    if (out << csv && out.flush()) {
        std::printf("wrote %s\n", csv_path.c_str());
    } else {
        std::fprintf(stderr, "error: cannot write '%s'\n", csv_path.c_str());
        rc = 2;
    }
    fieno_string_free(text);
    fieno_string_free(csv);
    return rc;
}

int run_plot(const std::string& checkpoint, const std::string& data_path,
             const std::string& out_dir) {
    const fieno_status s = fieno_emit_plots(checkpoint.c_str(),
                                            data_path.c_str(), out_dir.c_str());
    if (s != FIENO_OK) return report_failure(s);
    std::printf("plots written under %s\n", out_dir.c_str());
    return 0;
}

int run_verify(const std::string& suite) {
    char* report = nullptr;
    const fieno_status s = fieno_verify(suite.c_str(), &report);
    if (report != nullptr) {
        std::fputs(report, stdout);
        fieno_string_free(report);
    }
    if (s != FIENO_OK) {
        std::fprintf(stderr, "error: %s\n", fieno_last_error());
        return exit_code(s);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "fieno: learns boundary-data -> interior-solution operators on "
        "star-shaped 2-D domains"};
    app.require_subcommand(1);
    int rc = 0;

    auto* gen = app.add_subcommand("gen-data",
                                   "Build a ground-truth dataset from a config");
    std::string gen_config, gen_out;
    gen->add_option("--config", gen_config, "experiment config JSON file")
        ->required();
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->callback([&] { rc = run_gen_data(gen_config, gen_out); });

    auto* train =
        app.add_subcommand("train", "Train one model, write checkpoint + loss CSV");
    std::string train_config, train_data, train_out;
    train->add_option("--config", train_config, "experiment config JSON file")
        ->required();
    train->add_option("--data", train_data, "dataset JSON file")->required();
    train->add_option("--out", train_out, "output directory")->required();
    train->callback([&] { rc = run_train(train_config, train_data, train_out); });

    auto* eval = app.add_subcommand(
        "eval", "Score a checkpoint on a dataset, append a result record");
    std::string eval_ckpt, eval_data, eval_protocol = "zero-shot",
                           eval_results = "results.csv";
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint JSON file")
        ->required();
    eval->add_option("--data", eval_data, "dataset JSON file")->required();
    eval->add_option("--protocol", eval_protocol,
                     "zero-shot (score frozen) or few-shot (fine-tune first)");
    eval->add_option("--results", eval_results,
                     "results CSV to append to (default results.csv)");
    eval->callback(
        [&] { rc = run_eval(eval_ckpt, eval_data, eval_protocol, eval_results); });

    auto* grid = app.add_subcommand(
        "grid", "Run the full experiment grid from the config");
    std::string grid_config, grid_out;
    int grid_workers = 1;
    grid->add_option("--config", grid_config, "experiment config JSON file")
        ->required();
    grid->add_option("--out", grid_out, "output directory")->required();
    grid->add_option("--workers", grid_workers, "concurrent training units");
    grid->callback([&] { rc = run_grid(grid_config, grid_out, grid_workers); });

    auto* table = app.add_subcommand(
        "table", "Render the boundary x interior-count MSE table");
    std::string table_results, table_eq, table_bc;
    table->add_option("--results", table_results, "results CSV file")
        ->required();
    table->add_option("--equation", table_eq, "laplace | helmholtz | darcy")
        ->required();
    table->add_option("--bc", table_bc, "dirichlet | neumann")->required();
    table->callback([&] { rc = run_table(table_results, table_eq, table_bc); });

    auto* plot = app.add_subcommand(
        "plot", "Emit prediction/truth/error scatter SVGs");
    std::string plot_ckpt, plot_data, plot_out;
    plot->add_option("--checkpoint", plot_ckpt, "checkpoint JSON file")
        ->required();
    plot->add_option("--data", plot_data, "dataset JSON file")->required();
    plot->add_option("--out", plot_out, "output directory")->required();
    plot->callback([&] { rc = run_plot(plot_ckpt, plot_data, plot_out); });

    auto* verify = app.add_subcommand(
        "verify", "Run property suites: rff, autodiff, oracle, or all");
    std::string verify_suite = "all";
    verify->add_option("--suite", verify_suite, "suite name (default all)");
    verify->callback([&] { rc = run_verify(verify_suite); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return rc;
}
