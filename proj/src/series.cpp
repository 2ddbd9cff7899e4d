#include "simbench/series.hpp"

#include "simbench/errors.hpp"

namespace simbench {

std::string to_string(DgpKind kind) {
    switch (kind) {
        case DgpKind::Ar: return "ar";
        case DgpKind::Sar: return "sar";
        case DgpKind::LogisticMap: return "logistic";
        case DgpKind::Setar: return "setar";
        case DgpKind::MackeyGlass: return "mackey-glass";
    }
    throw InternalError("to_string(DgpKind): unknown kind");
}

DgpKind parse_dgp_kind(const std::string& text) {
    if (text == "ar") return DgpKind::Ar;
    if (text == "sar") return DgpKind::Sar;
    if (text == "logistic") return DgpKind::LogisticMap;
    if (text == "setar") return DgpKind::Setar;
    if (text == "mackey-glass") return DgpKind::MackeyGlass;
    throw ParameterError("unknown DGP kind '" + text + "'");
}

} // namespace simbench
