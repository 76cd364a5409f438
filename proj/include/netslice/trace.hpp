#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace netslice {

// One row of a solver trace. Elapsed columns count inner Newton iterations
// (a deterministic cost proxy), so emitted traces are reproducible bit for
// bit from (config, seed).
struct IterationRecord {
    int k = 0;
    double primal = 0.0;
    double dual = 0.0;
    double objective = 0.0;
    double elapsed_local_max = 0.0;
    double elapsed_total = 0.0;
};

struct RunTrace {
    std::vector<IterationRecord> rows;

    static const char* csv_header() {
        return "k,primal,dual,objective,elapsed_local_max,elapsed_total";
    }
    void write_csv(std::ostream& os) const {
        os << csv_header() << '\n';
        for (const auto& r : rows)
            os << r.k << ',' << r.primal << ',' << r.dual << ',' << r.objective << ','
               << r.elapsed_local_max << ',' << r.elapsed_total << '\n';
    }
};

}  // namespace netslice
