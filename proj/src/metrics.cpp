#include "tssd/metrics.hpp"

#include "tssd/error.hpp"

#include <algorithm>

namespace tssd {

namespace {

double ratio(std::size_t num, std::size_t den, bool& degenerate) {
    if (den == 0) {
        degenerate = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

SelectionReport selection_metrics(const std::vector<SampleId>& selected_clean, const std::vector<bool>& truth) {
    if (truth.empty()) throw InvalidSpec("selection metrics need ground truth");
    std::vector<bool> selected(truth.size(), false);
    for (SampleId id : selected_clean) {
        if (id >= truth.size()) throw IdMismatch("selected id " + std::to_string(id) + " has no ground truth");
        selected[id] = true;
    }
    SelectionReport r;
    r.total = truth.size();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (selected[i]) {
            ++r.selected;
            truth[i] ? ++r.tp : ++r.fp;
        } else {
            truth[i] ? ++r.fn : ++r.tn;
        }
    }
    r.precision = ratio(r.tp, r.tp + r.fp, r.degenerate);
    r.recall = ratio(r.tp, r.tp + r.fn, r.degenerate);
    r.tp_rate = r.recall;
    r.tn_rate = ratio(r.tn, r.tn + r.fp, r.degenerate);
    if (r.precision + r.recall > 0.0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    else
        r.degenerate = true;
    return r;
}

double accuracy(const std::vector<std::vector<double>>& probabilities, const Dataset& test) {
    if (test.empty()) throw InvalidSpec("accuracy on an empty test set");
    if (!test.has_truth()) throw InvalidSpec("accuracy needs true labels");
    if (probabilities.size() != test.size()) throw ContractViolation("prediction count differs from test size");
    std::size_t correct = 0;
    for (const Sample& s : test.samples()) {
        const auto& p = probabilities[s.id];
        // max_element returns the first maximum, i.e. the lowest class index.
        const auto pred = static_cast<ClassId>(std::max_element(p.begin(), p.end()) - p.begin());
        if (pred == *s.true_label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

double accuracy(const Ensemble& ensemble, const Dataset& test) {
    return accuracy(ensemble_predict(ensemble, test), test);
}

}  // namespace tssd
