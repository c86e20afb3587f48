#include "mixdiss/json_io.hpp"

#include "mixdiss/errors.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mixdiss {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

double number_from_json(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        if (s == "nan") return NAN;
    }
    throw ParseError("expected a number, got " + j.dump());
}

namespace {

void dump_rec(std::ostringstream& os, const nlohmann::json& j, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ",\n";
                first = false;
                os << pad << nlohmann::json(it.key()).dump() << ": ";
                dump_rec(os, it.value(), indent, depth + 1);
            }
            os << '\n' << close_pad << '}';
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            const bool flat = std::all_of(j.begin(), j.end(), [](const auto& e) { return e.is_primitive(); });
            os << '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) os << (flat ? ", " : ",");
                first = false;
                if (!flat) os << '\n' << pad;
                dump_rec(os, e, indent, depth + 1);
            }
            if (!flat) os << '\n' << close_pad;
            os << ']';
            return;
        }
        case nlohmann::json::value_t::number_float:
            os << format_double(j.get<double>());
            return;
        default:
            os << j.dump();
            return;
    }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
    std::ostringstream os;
    dump_rec(os, j, indent, 0);
    os << '\n';
    return os.str();
}

nlohmann::json to_json(const SymMat2& s) {
    return nlohmann::json::array({nlohmann::json::array({s.a11, s.a12}), nlohmann::json::array({s.a12, s.a22})});
}

SymMat2 sym2_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() || j[0].size() != 2 ||
        j[1].size() != 2) {
        throw ParseError("expected a 2x2 matrix, got " + j.dump());
    }
    if (!j[0][0].is_number() || !j[0][1].is_number() || !j[1][0].is_number() || !j[1][1].is_number()) {
        throw ParseError("supply matrix entries must be numbers");
    }
    const double a12 = j[0][1].get<double>();
    const double a21 = j[1][0].get<double>();
    if (a12 != a21) {
        throw ParseError("supply matrix must be symmetric");
    }
    SymMat2 s{j[0][0].get<double>(), a12, j[1][1].get<double>()};
    if (!s.finite()) {
        throw ParseError("supply matrix entries must be finite");
    }
    return s;
}

nlohmann::json to_json(const SupplySpec& spec) {
    return {{"theta", to_json(spec.theta)}, {"pi", to_json(spec.pi)}, {"epsilon", spec.epsilon}};
}

SupplySpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ParseError("supply spec must be a JSON object");
    }
    try {
        return {sym2_from_json(j.at("theta")), sym2_from_json(j.at("pi")), j.at("epsilon").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("supply spec: ") + e.what());
    }
}

namespace {

std::vector<double> flat_vector(const nlohmann::json& j) {
    std::vector<double> out;
    if (j.is_number()) {
        out.push_back(j.get<double>());
        return out;
    }
    if (!j.is_array()) {
        throw ParseError("expected an array of numbers");
    }
    if (j.size() == 1 && j[0].is_array()) {
        return flat_vector(j[0]);  // a single row [[c1, ..., cn]]
    }
    for (const auto& e : j) {
        if (e.is_array()) {
            if (e.size() != 1) throw ParseError("B and C must be vectors");
            out.push_back(e[0].get<double>());
        } else {
            out.push_back(e.get<double>());
        }
    }
    return out;
}

}  // namespace

namespace {

SystemDescriptor parse_system(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ParseError("system descriptor must be a JSON object");
    }
    SystemDescriptor d;
    const std::string kind = j.at("kind").get<std::string>();
    d.name = j.value("name", std::string{});
    if (kind == "PWL") {
        d.kind = SystemDescriptor::Kind::Pwl;
        d.alpha = j.at("alpha").get<double>();
        if (!(d.alpha > 0.0 && d.alpha < 1.0)) {
            throw ParseError("PWL alpha must lie in (0, 1)");
        }
        return d;
    }
    if (kind != "LTI") {
        throw ParseError("system kind must be LTI or PWL, got " + kind);
    }
    d.kind = SystemDescriptor::Kind::Lti;
    const auto& a = j.at("A");
    if (!a.is_array()) throw ParseError("A must be a row-major array of rows");
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd am(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = a[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            throw ParseError("A must be square");
        }
        for (Eigen::Index c = 0; c < n; ++c) am(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    const std::vector<double> b = flat_vector(j.at("B"));
    const std::vector<double> c = flat_vector(j.at("C"));
    if (static_cast<Eigen::Index>(b.size()) != n || static_cast<Eigen::Index>(c.size()) != n) {
        throw ParseError("B and C must have length n = " + std::to_string(n));
    }
    try {
        d.lti = StateSpace(am, Eigen::Map<const Eigen::VectorXd>(b.data(), n),
                           Eigen::Map<const Eigen::RowVectorXd>(c.data(), n), j.at("D").get<double>());
    } catch (const DimensionMismatch& e) {
        throw ParseError(e.what());
    }
    return d;
}

}  // namespace

SystemDescriptor system_from_json(const nlohmann::json& j) {
    try {
        return parse_system(j);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("system descriptor: ") + e.what());
    }
}

nlohmann::json to_json(const SystemDescriptor& d) {
    if (d.kind == SystemDescriptor::Kind::Pwl) {
        return {{"kind", "PWL"}, {"name", d.name}, {"alpha", d.alpha}};
    }
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index r = 0; r < d.lti.A.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < d.lti.A.cols(); ++c) row.push_back(d.lti.A(r, c));
        a.push_back(row);
    }
    return {{"kind", "LTI"},
            {"name", d.name},
            {"A", a},
            {"B", std::vector<double>(d.lti.B.data(), d.lti.B.data() + d.lti.B.size())},
            {"C", std::vector<double>(d.lti.C.data(), d.lti.C.data() + d.lti.C.size())},
            {"D", d.lti.D}};
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw ParseError("cannot open " + path);
    }
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    os << text;
}

}  // namespace mixdiss
