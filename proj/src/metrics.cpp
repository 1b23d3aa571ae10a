#include "sentinel/metrics.hpp"

#include <cmath>

#include "sentinel/util.hpp"

namespace sentinel {

double Confusion::accuracy() const {
    long t = total();
    return t == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(t);
}

double Confusion::precision(Label cls) const {
    long num = cls == Label::trojan ? tp : tn;
    long den = cls == Label::trojan ? tp + fp : tn + fn;
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double Confusion::recall(Label cls) const {
    long num = cls == Label::trojan ? tp : tn;
    long den = cls == Label::trojan ? tp + fn : tn + fp;
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double evaluate_metric(Metric m, const Confusion& c) {
    switch (m) {
        case Metric::accuracy:
            return c.accuracy();
        case Metric::f1_trojan: {
            double p = c.precision(Label::trojan);
            double r = c.recall(Label::trojan);
            return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
        }
        case Metric::mcc: {
            double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
            double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
            double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
            return den == 0.0 ? 0.0 : (tp * tn - fp * fn) / den;
        }
        case Metric::balanced_accuracy:
            return 0.5 * (c.recall(Label::trojan) + c.recall(Label::non_trojan));
    }
    return 0.0;
}

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::accuracy: return "accuracy";
        case Metric::f1_trojan: return "f1_trojan";
        case Metric::mcc: return "mcc";
        case Metric::balanced_accuracy: return "balanced_accuracy";
    }
    return "unknown";
}

Metric metric_from_name(const std::string& name) {
    std::string n = to_lower(name);
    if (n == "accuracy" || n == "acc") return Metric::accuracy;
    if (n == "f1" || n == "f1_trojan") return Metric::f1_trojan;
    if (n == "mcc") return Metric::mcc;
    if (n == "balanced_accuracy" || n == "bacc") return Metric::balanced_accuracy;
    throw DataError("unknown metric '" + name + "'");
}

}  // namespace sentinel
