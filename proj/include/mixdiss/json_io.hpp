#pragma once

// JSON schemas shared by the reports and the command-line tool.

#include "mixdiss/lti.hpp"
#include "mixdiss/mat_core.hpp"
#include "mixdiss/supply.hpp"

#include <json.hpp>

#include <string>

namespace mixdiss {

/// %.17g, with "inf" / "-inf" / "nan" spelled out.
std::string format_double(double v);

/// Finite values as numbers, non-finite ones as strings ("inf", "-inf", "nan").
nlohmann::json json_number(double v);
double number_from_json(const nlohmann::json& j);

/// Pretty-printed JSON with every floating-point number written to 17 significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// [[a11, a12], [a12, a22]]
nlohmann::json to_json(const SymMat2& s);
SymMat2 sym2_from_json(const nlohmann::json& j);

/// {"theta": [[..]], "pi": [[..]], "epsilon": e}
nlohmann::json to_json(const SupplySpec& spec);
SupplySpec spec_from_json(const nlohmann::json& j);

/// System file: {"kind": "LTI"|"PWL", "name": ..., "A": [[..]], "B": [..], "C": [..], "D": d}
/// or {"kind": "PWL", "alpha": a}.
struct SystemDescriptor {
    enum class Kind { Lti, Pwl };
    Kind kind = Kind::Lti;
    std::string name;
    StateSpace lti;
    double alpha = 0.0;
};

SystemDescriptor system_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SystemDescriptor& d);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mixdiss
