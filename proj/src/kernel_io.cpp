#include "genfrac/kernel_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace genfrac {

using nlohmann::json;

namespace {

double number(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw std::invalid_argument(std::string("kernel spec: '") + key + "' must be a number");
    return j.at(key).get<double>();
}

std::vector<double> number_array(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array())
        throw std::invalid_argument(std::string("kernel spec: '") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw std::invalid_argument(std::string("kernel spec: non-numeric entry in '") + key + "'");
        out.push_back(v.get<double>());
    }
    return out;
}

WeightFunction weight_from_json(const json& w) {
    if (!w.is_object() || !w.contains("kind") || !w.at("kind").is_string())
        throw std::invalid_argument("kernel spec: weight needs a 'kind'");
    const auto kind = w.at("kind").get<std::string>();
    if (kind == "constant") return WeightFunction::constant(number(w, "value"));
    if (kind == "poly" || kind == "polynomial") return WeightFunction::polynomial(number_array(w, "coefficients"));
    throw std::invalid_argument("kernel spec: unknown weight kind '" + kind + "'");
}

} // namespace

KernelSpec kernel_from_json(const json& j) {
    if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
        throw std::invalid_argument("kernel spec: expected an object with a 'family' string");
    const auto family = j.at("family").get<std::string>();
    std::string label;
    if (j.contains("label")) {
        if (!j.at("label").is_string()) throw std::invalid_argument("kernel spec: 'label' must be a string");
        label = j.at("label").get<std::string>();
    }
    if (family == "caputo") return KernelSpec::caputo(number(j, "alpha"), label);
    if (family == "distributed_order") {
        if (!j.contains("weight")) throw std::invalid_argument("kernel spec: distributed_order needs a 'weight'");
        return KernelSpec::distributed_order(weight_from_json(j.at("weight")), label);
    }
    if (family == "tabulated") return KernelSpec::tabulated(number_array(j, "log_p"), number_array(j, "log_K"), label);
    throw std::invalid_argument("kernel spec: unknown family '" + family + "'");
}

json kernel_to_json(const KernelSpec& kernel) {
    json j;
    j["family"] = kernel.family_name();
    if (!kernel.label().empty()) j["label"] = kernel.label();
    const auto& f = kernel.family();
    if (const auto* c = std::get_if<CaputoFamily>(&f)) {
        j["alpha"] = c->alpha;
    } else if (const auto* d = std::get_if<DistributedOrderFamily>(&f)) {
        const auto& w = d->weight;
        switch (w.kind()) {
        case WeightFunction::Kind::constant:
            j["weight"] = {{"kind", "constant"}, {"value", w.at_zero()}};
            break;
        case WeightFunction::Kind::polynomial:
            j["weight"] = {{"kind", "poly"}, {"coefficients", w.coefficients()}};
            break;
        case WeightFunction::Kind::custom:
            throw std::invalid_argument("kernel spec: custom weight '" + w.description() + "' cannot be serialized");
        }
    } else if (const auto* t = std::get_if<TabulatedFamily>(&f)) {
        j["log_p"] = t->log_p;
        j["log_K"] = t->log_K;
    }
    return j;
}

KernelSpec load_kernel(const std::string& path_or_json) {
    std::string text;
    if (!path_or_json.empty() && path_or_json.front() == '{') {
        text = path_or_json;
    } else {
        std::ifstream in(path_or_json);
        if (!in) throw std::invalid_argument("cannot open kernel spec '" + path_or_json + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("kernel spec is not valid JSON: ") + e.what());
    }
    return kernel_from_json(j);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string kernel_hash(const KernelSpec& kernel) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(kernel_to_json(kernel).dump())));
    return buf;
}

} // namespace genfrac
