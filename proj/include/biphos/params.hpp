#pragma once

#include <stdexcept>
#include <string>

namespace biphos {

/// Model parameters for the bistable-phosphorylation / nucleocytoplasmic
/// transport system.
///
/// Rates k_vn and k_vcy are effective translation rates (concentration/time)
/// for nuclear cargo and bulk cytoplasmic protein; k_nt is the nuclear import
/// rate of phosphorylated cargo (1/time); K_c and tau set the threshold and
/// timescale of the phosphorylation switch; A_cyto and A_n convert protein
/// counts to volume growth (so 1/A_cyto is the conserved total cytoplasmic
/// concentration); m and m_sca are the Hill exponents of the phosphorylation
/// propensity and of the smooth threshold-scaling function; sigma is the
/// additive noise amplitude of the stochastic variant.
///
/// The numeric defaults below are *calibrated* values: the source publications
/// of this model family do not pin down (m, m_sca, k_vn, k_vcy, A_cyto, A_n),
/// so they were fitted in-repo such that the reference point K_c=2.75,
/// tau=0.01, k_nt=0.1 lies inside the oscillatory window of a bistable
/// phosphorylation switch (see README, "Calibrated defaults", and the
/// `calibrate` CLI subcommand that regenerates them).
struct Params {
    double k_vn   = 0.0345;
    double k_vcy  = 0.1655;
    double k_nt   = 0.1;
    double K_c    = 2.75;
    double tau    = 0.01;
    double A_cyto = 0.01;
    double A_n    = 1.0;
    double m      = 4.0;
    double m_sca  = 4.0;
    double sigma  = 0.0;
    bool   use_piecewise_fsca = false;

    /// Throws std::invalid_argument on out-of-domain values. k_nt may be
    /// negative: continuation runs legitimately cross into k_nt < 0.
    void validate() const {
        auto bad = [](const std::string& msg) {
            throw std::invalid_argument("Params: " + msg);
        };
        if (!(k_vn > 0)) bad("k_vn must be > 0");
        if (!(k_vcy > 0)) bad("k_vcy must be > 0");
        if (!(K_c > 0)) bad("K_c must be > 0");
        if (!(tau > 0)) bad("tau must be > 0");
        if (!(A_cyto > 0)) bad("A_cyto must be > 0");
        if (!(A_n > 0)) bad("A_n must be > 0");
        if (!(m >= 1)) bad("m must be >= 1");
        if (!(m_sca >= 1)) bad("m_sca must be >= 1");
        if (!(sigma >= 0)) bad("sigma must be >= 0");
    }
};

/// Parse a plain-text `key = value` config (one pair per line, `#` comments).
/// Unknown keys raise; missing keys keep their defaults. Returns the merged
/// parameter set after validate().
Params params_from_config(const std::string& text);

/// Load params_from_config from a file; error messages carry line numbers.
Params params_from_config_file(const std::string& path);

/// Apply one `key=value` assignment on top of existing parameters (the CLI's
/// --set flag). Throws std::invalid_argument on unknown keys or malformed
/// values; does not re-validate — callers validate() after the last override.
void apply_param_assignment(Params& p, const std::string& assignment);

/// Serialize with full round-trip precision, one `key = value` per line,
/// in declaration order. parse(serialize(p)) == p exactly.
std::string params_to_config(const Params& p);

}  // namespace biphos
