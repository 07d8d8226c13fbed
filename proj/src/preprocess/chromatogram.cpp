#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

#include "../csv.hpp"
#include "rtt/preprocess.hpp"

namespace rtt {

void Chromatogram::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("chromatogram dt must be > 0");
    if (!std::isfinite(t0)) throw ValidationError("chromatogram t0 must be finite");
    if (signal.size() < 2) throw ValidationError("chromatogram needs at least 2 samples");
    for (double v : signal) {
        if (!std::isfinite(v)) throw ValidationError("chromatogram contains non-finite values");
    }
}

Chromatogram parse_chromatogram(std::istream& in) {
    std::vector<double> t, y;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (csv::skippable(line)) continue;
        auto fields = csv::split(line);
        if (first) {
            first = false;
            if (fields.front() == "t") continue;
        }
        if (fields.size() != 2) throw ParseError(lineno, "chromatogram rows are t,signal");
        auto tv = csv::to_double(fields[0]);
        auto yv = csv::to_double(fields[1]);
        if (!tv || !yv) throw ParseError(lineno, "malformed number");
        t.push_back(*tv);
        y.push_back(*yv);
    }
    if (t.size() < 2) throw ParseError(lineno, "chromatogram needs at least 2 samples");
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(dt > 0.0)) throw ParseError(lineno, "time axis must increase");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * dt) {
            throw ParseError(i + 1, "non-uniform sampling near t = " + std::to_string(t[i]));
        }
    }
    Chromatogram c{t.front(), dt, std::move(y)};
    c.validate();
    return c;
}

void write_chromatogram(std::ostream& out, const Chromatogram& chrom) {
    out << "t,signal\n" << std::setprecision(12);
    for (std::size_t i = 0; i < chrom.size(); ++i) out << chrom.time(i) << ',' << chrom.signal[i] << '\n';
}

Chromatogram load_chromatogram_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open chromatogram '" + path + "'");
    try {
        return parse_chromatogram(in);
    } catch (const ParseError& e) {
        throw InputError(path + ": " + e.what());
    }
}

void save_chromatogram_file(const Chromatogram& chrom, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write chromatogram '" + path + "'");
    write_chromatogram(out, chrom);
}

}  // namespace rtt
