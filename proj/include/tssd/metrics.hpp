#pragma once

#include "tssd/dataset.hpp"
#include "tssd/ssl.hpp"

#include <cstddef>
#include <vector>

namespace tssd {

struct SelectionReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double tp_rate = 0.0;
    double tn_rate = 0.0;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t selected = 0;
    std::size_t total = 0;
    bool degenerate = false;  // some ratio had a zero denominator and was reported as 0
};

/// Scores a clean selection against per-id ground truth (true = label is clean).
SelectionReport selection_metrics(const std::vector<SampleId>& selected_clean, const std::vector<bool>& truth);

/// Fraction of rows whose argmax (lowest index on ties) equals the true label.
double accuracy(const std::vector<std::vector<double>>& probabilities, const Dataset& test);

double accuracy(const Ensemble& ensemble, const Dataset& test);

}  // namespace tssd
