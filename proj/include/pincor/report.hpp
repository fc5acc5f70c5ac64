#ifndef PINCOR_REPORT_HPP
#define PINCOR_REPORT_HPP

#include <string>
#include <vector>

#include <json.hpp>

namespace pincor {

// Outcome of one theorem/inequality check. Gated preconditions refuse
// (status "refused") rather than failing; "informational" marks exploratory
// runs outside the hypotheses that are reported but never asserted.
struct CheckReport {
    enum class Status { Pass, Fail, Refused, Informational };

    struct Margin {
        std::string name;
        double value = 0.0;
    };

    std::string check_id;
    nlohmann::json params;
    std::vector<Margin> margins;
    double band_lo = 0.0;
    double band_hi = 0.0;
    bool has_band = false;
    Status status = Status::Pass;
    std::string note;

    bool passed() const { return status == Status::Pass; }
    bool failed() const { return status == Status::Fail; }

    void add_margin(const std::string& name, double value) { margins.push_back({name, value}); }
    void set_band(double lo, double hi) {
        band_lo = lo;
        band_hi = hi;
        has_band = true;
    }
    void set_status(bool pass) { status = pass ? Status::Pass : Status::Fail; }

    nlohmann::json to_json() const;
    static const char* status_name(Status s);
};

}  // namespace pincor

#endif
