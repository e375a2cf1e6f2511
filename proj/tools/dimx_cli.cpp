#include "dimx/errors.hpp"
#include "dimx/evaluation.hpp"
#include "dimx/serialize.hpp"
#include "dimx/service.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

int run_fit(const std::string& path, const std::string& method, const std::string& id_column, bool no_standardize,
            const dimx::TrainConfig& train, const std::string& model_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    const dimx::Dataset data =
        dimx::load_csv(in, id_column.empty() ? std::nullopt : std::optional<std::string>(id_column));

    std::optional<dimx::Model> model;
    if (method == "pca")
        model.emplace(dimx::fit_pca(data, {.standardize = !no_standardize}));
    else
        model.emplace(dimx::train_autoencoder(data, train));

    const dimx::Matrix positions = dimx::project_all(*model, data.values());
    std::cout.precision(17);
    std::cout << "id,x,y\n";
    for (std::size_t i = 0; i < data.rows(); ++i)
        std::cout << data.ids()[i] << ',' << positions(static_cast<Eigen::Index>(i), 0) << ','
                  << positions(static_cast<Eigen::Index>(i), 1) << '\n';

    if (!model_out.empty()) {
        std::ofstream out(model_out);
        if (!out) throw std::runtime_error("cannot write " + model_out);
        out << dimx::to_json(*model).dump(2) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interactive dimensionality-reduction exploration engine"};
    app.require_subcommand(1);

    auto* fit = app.add_subcommand("fit", "Fit a model to a CSV file and print 2-D positions");
    std::string fit_path, method = "pca", id_column, model_out;
    bool no_standardize = false;
    dimx::TrainConfig train;
    fit->add_option("file", fit_path, "CSV file with a header row")->required()->check(CLI::ExistingFile);
    fit->add_option("--method", method, "pca or autoencoder")->check(CLI::IsMember({"pca", "autoencoder"}));
    fit->add_option("--id-column", id_column, "Column holding row ids");
    fit->add_flag("--no-standardize", no_standardize, "Fit PCA on raw instead of z-scored features");
    fit->add_option("--epochs", train.epochs, "Autoencoder epochs");
    fit->add_option("--batch-size", train.batch_size, "Autoencoder minibatch size");
    fit->add_option("--learning-rate", train.learning_rate, "Adam learning rate");
    fit->add_option("--seed", train.seed, "Training seed");
    fit->add_option("--hidden", train.hidden, "Encoder hidden widths, e.g. 128,32")->delimiter(',');
    fit->add_option("--model-out", model_out, "Write the fitted model as JSON");

    auto* bench = app.add_subcommand("bench", "Time and score out-of-sample projections against recomputation");
    dimx::BenchConfig config;
    std::string out_path;
    std::vector<std::string> models{"pca"};
    bench->add_option("--out", out_path, "CSV report path (default stdout)");
    bench->add_option("--sample-counts", config.sample_counts, "n values at fixed d")->delimiter(',');
    bench->add_option("--dimension-counts", config.dimension_counts, "d values at fixed n")->delimiter(',');
    bench->add_option("--fixed-d", config.fixed_d);
    bench->add_option("--fixed-n", config.fixed_n);
    bench->add_option("-k", config.k, "Neighborhood size");
    bench->add_option("--repeats", config.repeats)->check(CLI::PositiveNumber);
    bench->add_option("--seed", config.seed);
    bench->add_option("--forward-fraction", config.forward_fraction, "Forward change as a fraction of sigma");
    bench->add_option("--backward-fraction", config.backward_fraction, "Backward move as a fraction of plane width");
    bench->add_option("--models", models, "pca, autoencoder")
        ->delimiter(',')
        ->check(CLI::IsMember({"pca", "autoencoder"}));
    bench->add_option("--ae-epochs", config.ae_config.epochs);
    bench->add_option("--ae-hidden", config.ae_config.hidden)->delimiter(',');

    auto* serve = app.add_subcommand("serve", "Run the JSON-over-HTTP session service");
    int port = 8080;
    std::string host = "127.0.0.1", snapshot_dir;
    serve->add_option("--port", port, "Listen port (PORT overrides)");
    serve->add_option("--host", host);
    serve->add_option("--snapshot-dir", snapshot_dir, "Directory for session snapshots");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) return run_fit(fit_path, method, id_column, no_standardize, train, model_out);

        if (*bench) {
            config.include_pca = std::find(models.begin(), models.end(), "pca") != models.end();
            config.include_autoencoder = std::find(models.begin(), models.end(), "autoencoder") != models.end();
            const auto rows = dimx::run_benchmark(config);
            if (out_path.empty()) {
                dimx::write_benchmark_csv(std::cout, rows);
            } else {
                std::ofstream out(out_path);
                if (!out) throw std::runtime_error("cannot write " + out_path);
                dimx::write_benchmark_csv(out, rows);
            }
            return 0;
        }

        if (*serve) {
            if (const char* env = std::getenv("PORT"); env && *env) port = std::stoi(env);
            dimx::ServiceOptions options;
            if (!snapshot_dir.empty()) options.snapshot_dir = snapshot_dir;
            dimx::Service service(options);
            dimx::serve_http(service, host, port);
            return 0;
        }
    } catch (const dimx::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
