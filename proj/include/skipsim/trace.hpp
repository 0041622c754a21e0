#ifndef SKIPSIM_TRACE_HPP
#define SKIPSIM_TRACE_HPP

#include <cstdint>
#include <vector>

namespace skipsim {

/// One simulation snapshot. Record 0 describes the initial state; record t the
/// state after t iterations. Counters are cumulative.
struct TraceRecord {
    std::uint64_t t = 0;
    double psi = 0.0;
    double dist_sq = 0.0;
    std::uint64_t comm_rounds = 0;
    std::vector<std::uint64_t> grad_calls;
    double sim_time = 0.0;

    std::uint64_t grad_calls_total() const {
        std::uint64_t s = 0;
        for (std::uint64_t c : grad_calls) s += c;
        return s;
    }
};

struct Trace {
    std::size_t n = 0;
    std::vector<TraceRecord> records;

    const TraceRecord& final_record() const { return records.back(); }
};

} // namespace skipsim

#endif
