#pragma once

// Sectioned key/value scenario files.
//
//   [pon]
//   wavelengths = 10
//   line_rate = 1Gbps            ; needed only for byte-denominated sizes
//
//   [policy]
//   kind = random                ; random | periodic | gpon_frame
//   frame = 125us                ; gpon_frame only
//   order = 0 1 2 3              ; periodic only, one line per wavelength
//
//   [onus]                       ; a group of `count` identical ONUs
//   count = 20
//   class = 1                    ; label used by region commands (1-based)
//   transmitters = 1
//   switch_overhead = 1.2us
//   overhead_ratio = 0.001       ; gpon_frame only
//   queues = 1                   ; copies of the queue keys below
//   grant = 8us                  ; or 1000B, or inf for unlimited gated
//   weight = 1
//   packet = 1000B               ; mean transmission size
//   packet_law = deterministic   ; or exponential
//   load = 0.43                  ; per-queue intensity; or rate = 53750/s
//
//   [queue]                      ; optional, each one adds a queue to the
//   grant = 16us                 ; preceding [onus] group and replaces the
//   load = 0.1                   ; `queues` copies; unset keys inherit
//
// Durations need a unit suffix (s, ms, us, ns, or B with a line rate).

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wdmpon/model.hpp"

namespace wdmpon {

class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct Scenario {
    PonConfig config;
    TrafficSpec traffic;
    PollingPolicy policy = RandomPolling{};
    std::vector<std::vector<int>> queue_class;  // zero-based class index per queue
    double line_rate = 0.0;                     // bits per second; 0 when unset

    int n_classes() const;
};

Scenario parse_scenario(std::istream& in, const std::string& source = "<input>");
Scenario load_scenario(const std::string& path);

/// Canonical text form; parse_scenario(format_scenario(s)) reproduces s exactly.
std::string format_scenario(const Scenario& scenario);

/// "1.2us" -> 1.2e-6. Byte sizes ("1000B") convert through `line_rate` (bits/s).
double parse_duration(const std::string& text, double line_rate = 0.0);

/// "1Gbps" -> 1e9.
double parse_bit_rate(const std::string& text);

/// Shortest decimal text that reads back to the same double.
std::string exact_number(double value);

}  // namespace wdmpon
