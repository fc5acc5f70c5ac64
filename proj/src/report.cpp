#include "pincor/report.hpp"

namespace pincor {

const char* CheckReport::status_name(Status s) {
    switch (s) {
        case Status::Pass: return "pass";
        case Status::Fail: return "fail";
        case Status::Refused: return "refused";
        case Status::Informational: return "informational";
    }
    return "?";
}

nlohmann::json CheckReport::to_json() const {
    nlohmann::json j;
    j["check_id"] = check_id;
    j["params"] = params;
    nlohmann::json m = nlohmann::json::object();
    for (const auto& mg : margins) m[mg.name] = mg.value;
    j["margins"] = m;
    if (has_band) j["band"] = {band_lo, band_hi};
    j["status"] = status_name(status);
    j["pass"] = passed() || status == Status::Refused || status == Status::Informational;
    if (!note.empty()) j["note"] = note;
    return j;
}

}  // namespace pincor
