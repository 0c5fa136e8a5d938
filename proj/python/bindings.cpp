#include "tssd/cli.hpp"
#include "tssd/error.hpp"
#include "tssd/gmm.hpp"
#include "tssd/psd.hpp"
#include "tssd/scoring.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace tssd;

namespace {

RunConfig config_from(const std::map<std::string, std::string>& settings) {
    RunConfig config = default_train_config();
    for (const auto& [k, v] : settings) apply_setting(config, k, v);
    return config;
}

RunConfig distill_config_from(const std::map<std::string, std::string>& settings) {
    RunConfig config;
    for (const auto& [k, v] : settings) apply_setting(config, k, v);
    return config;
}

}  // namespace

PYBIND11_MODULE(_tssd, m) {
    m.doc() = "Sample selection and purification for noisy labels";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<InvalidSpec>(m, "InvalidSpec", base.ptr());
    py::register_exception<IdMismatch>(m, "IdMismatch", base.ptr());
    py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("num_classes", &Dataset::num_classes)
        .def_property_readonly("feature_dim", &Dataset::feature_dim)
        .def("__len__", &Dataset::size)
        .def_property_readonly("features", [](const Dataset& d) {
            std::vector<std::vector<double>> out;
            for (const auto& s : d.samples()) out.push_back(s.features);
            return out;
        })
        .def_property_readonly("logits", [](const Dataset& d) {
            std::vector<std::vector<double>> out;
            for (const auto& s : d.samples()) out.push_back(s.logits);
            return out;
        })
        .def_property_readonly("noisy_labels", [](const Dataset& d) {
            std::vector<ClassId> out;
            for (const auto& s : d.samples()) out.push_back(s.noisy_label);
            return out;
        })
        .def_property_readonly("true_labels", [](const Dataset& d) {
            std::vector<std::optional<ClassId>> out;
            for (const auto& s : d.samples()) out.push_back(s.true_label);
            return out;
        })
        .def("flip_fraction", &Dataset::flip_fraction)
        .def("to_csv", [](const Dataset& d) {
            std::ostringstream out;
            write_sample_table(d, out);
            return out.str();
        });

    m.def("load", [](const std::string& path) { return load_sample_table(path); }, py::arg("path"));
    m.def("from_csv", [](const std::string& text) {
        std::istringstream in(text);
        return read_sample_table(in);
    }, py::arg("text"));
    m.def("save", [](const Dataset& d, const std::string& path) { save_sample_table(d, path); },
          py::arg("dataset"), py::arg("path"));

    m.def("generate", [](const std::map<std::string, std::string>& settings) {
        const RunConfig config = resolve_seeds(distill_config_from(settings));
        return inject_noise(generate_synthetic(config.synthetic), config.noise);
    }, py::arg("settings") = std::map<std::string, std::string>{},
       "Synthetic benchmark; settings use the same keys as the config file.");

    m.def("cross_entropy_score", [](const std::vector<double>& logits, ClassId label) {
        return cross_entropy_score(logits, label);
    }, py::arg("logits"), py::arg("label"));
    m.def("cosine_similarity", [](const std::vector<double>& a, const std::vector<double>& b) {
        return cosine_similarity_score(a, b);
    }, py::arg("a"), py::arg("b"));

    py::class_<Gmm1d>(m, "Gmm1d")
        .def_property_readonly("weights", [](const Gmm1d& g) { return g.weights; })
        .def_property_readonly("means", [](const Gmm1d& g) { return g.means; })
        .def_property_readonly("variances", [](const Gmm1d& g) { return g.variances; })
        .def_readonly("clean_component", &Gmm1d::clean_component)
        .def_readonly("converged", &Gmm1d::converged)
        .def_readonly("log_likelihood", &Gmm1d::log_likelihood)
        .def("posterior", [](const Gmm1d& g, double x) { return posterior(g, x); }, py::arg("x"))
        .def("is_bimodal", [](const Gmm1d& g) { return is_bimodal(g); });

    m.def("fit_gmm1d", [](const std::vector<double>& values, bool larger_mean_clean, std::size_t max_iter) {
        GmmConfig cfg;
        cfg.max_iter = max_iter;
        cfg.orientation = larger_mean_clean ? Orientation::LargerMeanClean : Orientation::SmallerMeanClean;
        return fit_gmm1d(values, cfg);
    }, py::arg("values"), py::arg("larger_mean_clean") = false, py::arg("max_iter") = 100);

    m.def("distill", [](const Dataset& d, const std::map<std::string, std::string>& settings) {
        const DistillRun run = run_distill(distill_config_from(settings), d);
        return py::make_tuple(partition_tags(run.partition), run.report.dump());
    }, py::arg("dataset"), py::arg("settings") = std::map<std::string, std::string>{});

    m.def("train", [](const Dataset& d, const std::map<std::string, std::string>& settings) {
        const TrainRun run = run_train(config_from(settings), d);
        // Held-out test ids carry no tag.
        std::map<SampleId, std::string> tags(run.tags.begin(), run.tags.end());
        return py::make_tuple(tags, run.report.dump());
    }, py::arg("dataset"), py::arg("settings") = std::map<std::string, std::string>{});

    m.def("evaluate", [](const std::map<SampleId, std::string>& tags, const Dataset& truth) {
        return evaluate_partition({tags.begin(), tags.end()}, truth).dump();
    }, py::arg("tags"), py::arg("truth"));

    m.def("config_keys", &config_keys);
}
