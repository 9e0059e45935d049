#pragma once

#include "llm4ts/errors.hpp"

namespace llm4ts::sim {

// Behavioral-dynamics parameters for the step-count intervention simulator.
// Defaults match the standard experimental protocol; p_w00/p_w11 and eta_d
// are the scenario knobs.
struct SimParams {
  double sigma_ctx = 0.4;  // context feature noise std-dev, > 0
  double delta_h = 0.1;    // habituation decay factor
  double eps_h = 0.05;     // habituation increment per message
  double delta_d = 0.1;    // disengagement decay factor
  double eps_d = 0.05;     // disengagement increment on a tailoring error
  double eta_d = 0.05;     // extra increment for messaging while unable to walk
  double rho1 = 50.0;      // step bonus, untailored message
  double rho2 = 200.0;     // step bonus, correctly tailored message
  double m_s = 0.1;        // baseline step count
  double p_w00 = 0.5;      // P(stay in can't-walk state)
  double p_w11 = 0.7;      // P(stay in can-walk state)
  int horizon = 50;        // max decision points per trial
  double h0 = 0.0;         // initial habituation level
  double d0 = 0.0;         // initial disengagement risk

  void validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!(sigma_ctx > 0.0)) throw ValidationError("sigma_ctx must be > 0");
    if (!unit(delta_h) || !unit(eps_h)) throw ValidationError("delta_h/eps_h must be in [0,1]");
    if (!unit(delta_d) || !unit(eps_d) || !unit(eta_d))
      throw ValidationError("delta_d/eps_d/eta_d must be in [0,1]");
    if (rho1 < 0.0 || rho2 < 0.0 || m_s < 0.0)
      throw ValidationError("rho1/rho2/m_s must be >= 0");
    if (!unit(p_w00) || !unit(p_w11)) throw ValidationError("p_w00/p_w11 must be in [0,1]");
    if (horizon < 1) throw ValidationError("horizon must be >= 1");
    if (!unit(h0) || !unit(d0)) throw ValidationError("h0/d0 must be in [0,1]");
  }
};

}  // namespace llm4ts::sim
