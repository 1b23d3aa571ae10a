#pragma once

#include <string>

#include "sentinel/types.hpp"

namespace sentinel {

struct Confusion {
    long tp = 0, fp = 0, tn = 0, fn = 0;  // positive class = trojan

    void add(Label predicted, Label actual) {
        if (actual == Label::trojan)
            (predicted == Label::trojan ? tp : fn)++;
        else
            (predicted == Label::trojan ? fp : tn)++;
    }
    long total() const { return tp + fp + tn + fn; }
    double accuracy() const;
    double precision(Label cls) const;
    double recall(Label cls) const;
};

enum class Metric { accuracy, f1_trojan, mcc, balanced_accuracy };

double evaluate_metric(Metric m, const Confusion& c);
std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

}  // namespace sentinel
