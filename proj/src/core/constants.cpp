#include "core/constants.hpp"

#include <cmath>
#include <sstream>

namespace aplab::constants {

Rat compute_upsilon(int birch_rank, int d, int R) {
  if (d < 2) throw DomainError("degree d must be at least 2");
  if (R < 1) throw DomainError("R must be at least 1");
  if (birch_rank < 0) throw DomainError("Birch rank must be non-negative");
  Rat lead = Rat(d) * Rat(birch_rank) / (Rat(d - 1) * rat_pow(Rat(2), d - 1));
  return lead * (Rat(d) - Rat(1, R)) + Rat(R);
}

Rat compute_rho(int d, int R) {
  if (d < 2) throw DomainError("degree d must be at least 2");
  if (R < 1) throw DomainError("R must be at least 1");
  Rat inner = Rat(1) + Rat(d) / Rat(2 * R * (d - 1) + 1) + Rat(3 * R * d) / Rat(3 * R * (d - 1) + 1);
  return Rat(4 * R * (R + 1) * d) * inner;
}

EpsMatrix compute_eps_matrix(const Rat& K, int d, int R) {
  if (K <= 0) throw DomainError("K must be positive");
  EpsMatrix m;
  Rat Rd(R * d);
  Rat half(1, 2);
  // column 1: (Rd + 1/2, Rd + 1/2, 0)
  m.col[0] = {Rd + half, Rd + half, Rat(0)};
  // column 2: (K, K, 0)
  m.col[1] = {K, K, Rat(0)};
  // column 3
  Rat c31 = (K - Rat(R * (R + 1) * (d - 1))) / Rat(4 * R * (R + 1) * d) + Rd;
  Rat c32 = Rat(d) * (K - Rat(R) * Rat(R) * Rat(d - 1)) / Rat(2 * R * (d - 1)) + Rat(R) + K +
            Rat(2 * d) * K / Rat(d - 1) - Rd;
  Rat c33 = (K - Rat(R * (R + 1) * (d - 1))) / Rat(4 * R * (R + 1) * d) - Rat(R) - K + Rd;
  if (c33 < 0) c33 = 0;
  m.col[2] = {c31, c32, c33};
  return m;
}

Rat compute_theta_prime(const Rat& K, int d, int R) {
  EpsMatrix eps = compute_eps_matrix(K, d, R);
  Rat best = Rat(1) / compute_rho(d, R);
  for (int i = 1; i <= 3; ++i) {
    Rat den = eps.eps(i, 2) + eps.eps(i, 3);
    if (den == 0) continue;  // degenerate term, treated as +infinity
    Rat term = (eps.eps(i, 1) - Rat(d * R)) / den;
    if (term < best) best = term;
  }
  return best;
}

WeightedParams compute_weighted_params(int n, int d, int R, const Rat& K, double beta_n) {
  if (n <= R * d) throw DomainError("weighted parameters need n > R d");
  EpsMatrix eps = compute_eps_matrix(K, d, R);
  Rat theta_prime = compute_theta_prime(K, d, R);
  Rat rho = compute_rho(d, R);
  Rat nrd(n - R * d);

  WeightedParams out;
  Rat best(0);
  bool first = true;
  for (int i = 1; i <= 3; ++i) {
    Rat den = eps.eps(i, 1) - Rat(R * d);
    if (den <= 0)
      throw HypothesisError("eps_{i,1} <= Rd: weighted-sieve exponent undefined for i=" +
                            std::to_string(i));
    Rat term = (Rat(2) * eps.eps(i, 2) - 1) / den;
    if (first || term > best) {
      best = term;
      first = false;
    }
  }
  out.u_dd = nrd * best;

  if (theta_prime <= 0)
    throw HypothesisError("theta' <= 0: the weighted-sieve hypotheses fail for these inputs");
  Rat inv_theta = Rat(1) / theta_prime;
  out.u_hat = out.u_dd;
  if (inv_theta > out.u_hat) out.u_hat = inv_theta;
  Rat two_nrd_rho = Rat(2) * nrd * rho;
  if (two_nrd_rho > out.u_hat) out.u_hat = two_nrd_rho;

  out.c_n = beta_n / n;
  Rat gap = theta_prime - Rat(1) / out.u_hat;
  if (gap <= 0)
    throw HypothesisError("theta' <= 1/u^: v^ undefined (weighted-sieve hypotheses fail)");
  out.v_hat = (n * out.c_n - 1.0) / gap.get_d();

  double uh = out.u_hat.get_d();
  double ratio = uh / out.v_hat;
  out.r0 = static_cast<double>(n) * uh / (n - R * d) - 1.0 +
           n * (1.0 + ratio * out.c_n) * std::log(out.v_hat / uh) - n * (1.0 - ratio);
  return out;
}

TheoremFlags check_theorem_hypotheses(int n, int d, int R, const forms::RankCertificate& cert) {
  TheoremFlags flags;
  Int B(cert.birch_rank);
  Int pw = int_pow(Int(2), d - 1);
  Rat upsilon = compute_upsilon(cert.birch_rank, d, R);

  // main vector-sieve theorem:
  // B > max{2^(d-1)(d-1)R(R+1), 2^(d-1)(d-1)R^2 + (R+1)(Upsilon+1), 2^(d-1)(d^2-1)R^2}
  Rat bound = Rat(pw * Int(d - 1) * Int(R) * Int(R + 1));
  Rat second = Rat(pw * Int(d - 1) * Int(R) * Int(R)) + Rat(R + 1) * (upsilon + 1);
  if (second > bound) bound = second;
  Rat third(pw * Int(d * d - 1) * Int(R) * Int(R));
  if (third > bound) bound = third;
  flags.main_vector = Rat(B) > bound;

  // Rosser-Iwaniec route: K > R(R+1)(d-1)
  flags.rosser_iwaniec = cert.K > Rat(R * (R + 1) * (d - 1));

  // weighted route:
  // B > max{(d-1)R(R+1)2^(d-1), (d^2-1)R 2^(d-1), (d-1)R^2 2^(d-1) + 2(R+1)}
  Int w1 = Int(d - 1) * Int(R) * Int(R + 1) * pw;
  Int w2 = Int(d * d - 1) * Int(R) * pw;
  Int w3 = Int(d - 1) * Int(R) * Int(R) * pw + Int(2 * (R + 1));
  Int wmax = std::max(w1, std::max(w2, w3));
  flags.weighted = B > wmax;

  // nonsingular hypersurface corollary: d >= 5, R = 1 with B = n (nonsingular),
  // n > 2^(d-1)(d^2-1)
  flags.hypersurface =
      d >= 5 && R == 1 && cert.birch_rank == n && Int(n) > pw * Int(d * d - 1);
  return flags;
}

Int comparison_u_threshold(int n, int d, int R) {
  if (n < 1 || d < 1 || R < 1) throw DomainError("comparison_u_threshold needs positive inputs");
  // ceil(n^(3/2)) = ceil(sqrt(n^3)), exact
  Int cube = int_pow(Int(n), 3);
  Int root, rem;
  mpz_sqrtrem(root.get_mpz_t(), rem.get_mpz_t(), cube.get_mpz_t());
  if (rem != 0) root += 1;
  return Int(256) * root * Int(d) * Int(d + 1) * Int(R) * Int(R) * Int(R + 1) * Int(R + 2);
}

ConstantBundle compute_bundle(int n, int d, int R, int birch_rank,
                              std::optional<double> beta_n) {
  ConstantBundle b;
  b.n = n;
  b.d = d;
  b.R = R;
  b.birch_rank = birch_rank;
  auto cert = forms::make_certificate(birch_rank, d, R, forms::RankProvenance::UserDeclared);
  b.K = cert.K;
  b.theta = cert.theta;
  b.upsilon = compute_upsilon(birch_rank, d, R);
  b.rho = compute_rho(d, R);
  if (b.K > 0) {
    b.eps = compute_eps_matrix(b.K, d, R);
    b.theta_prime = compute_theta_prime(b.K, d, R);
  }
  b.flags = check_theorem_hypotheses(n, d, R, cert);
  b.comparison_threshold = comparison_u_threshold(n, d, R);
  if (beta_n) {
    try {
      b.weighted = compute_weighted_params(n, d, R, b.K, *beta_n);
    } catch (const std::exception& e) {
      b.weighted_error = e.what();
    }
  }
  return b;
}

namespace {

std::string kv(const std::string& key, const Rat& q) {
  std::ostringstream os;
  os << key << "=" << rat_str(q) << " (" << q.get_d() << ")";
  return os.str();
}

}  // namespace

std::string render_report(const ConstantBundle& b) {
  std::ostringstream os;
  os << "[instance]\n";
  os << "n=" << b.n << "\nd=" << b.d << "\nR=" << b.R << "\nbirch_rank=" << b.birch_rank << "\n";
  os << "[constants]\n";
  os << kv("K", b.K) << "\n" << kv("Theta", b.theta) << "\n";
  os << kv("Upsilon", b.upsilon) << "\n" << kv("rho", b.rho) << "\n";
  if (b.K > 0) {
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j)
        os << kv("eps_" + std::to_string(i) + "_" + std::to_string(j), b.eps.eps(i, j)) << "\n";
    os << kv("theta_prime", b.theta_prime) << "\n";
  }
  os << "comparison_u_threshold=" << int_str(b.comparison_threshold) << "\n";
  if (b.weighted) {
    os << "[weighted]\n";
    os << kv("u_dd", b.weighted->u_dd) << "\n" << kv("u_hat", b.weighted->u_hat) << "\n";
    os << "c_n=" << b.weighted->c_n << "\nv_hat=" << b.weighted->v_hat
       << "\nr0=" << b.weighted->r0 << "\n";
  } else if (!b.weighted_error.empty()) {
    os << "[weighted]\nerror=" << b.weighted_error << "\n";
  }
  os << "[hypotheses]\n";
  os << "thm_main_vector=" << (b.flags.main_vector ? "true" : "false") << "\n";
  os << "thm_rosser_iwaniec=" << (b.flags.rosser_iwaniec ? "true" : "false") << "\n";
  os << "thm_weighted=" << (b.flags.weighted ? "true" : "false") << "\n";
  os << "cor_hypersurface=" << (b.flags.hypersurface ? "true" : "false") << "\n";
  return os.str();
}

std::string render_report_json(const ConstantBundle& b) {
  std::ostringstream os;
  auto rat = [](const Rat& q) {
    return "{\"exact\":\"" + rat_str(q) + "\",\"approx\":" + std::to_string(q.get_d()) + "}";
  };
  os << "{";
  os << "\"n\":" << b.n << ",\"d\":" << b.d << ",\"R\":" << b.R
     << ",\"birch_rank\":" << b.birch_rank << ",";
  os << "\"K\":" << rat(b.K) << ",\"Theta\":" << rat(b.theta) << ",\"Upsilon\":" << rat(b.upsilon)
     << ",\"rho\":" << rat(b.rho) << ",";
  if (b.K > 0) {
    os << "\"eps\":[";
    for (int i = 1; i <= 3; ++i) {
      os << (i > 1 ? "," : "") << "[";
      for (int j = 1; j <= 3; ++j) os << (j > 1 ? "," : "") << rat(b.eps.eps(i, j));
      os << "]";
    }
    os << "],\"theta_prime\":" << rat(b.theta_prime) << ",";
  }
  os << "\"comparison_u_threshold\":\"" << int_str(b.comparison_threshold) << "\",";
  if (b.weighted) {
    os << "\"weighted\":{\"u_dd\":" << rat(b.weighted->u_dd)
       << ",\"u_hat\":" << rat(b.weighted->u_hat) << ",\"c_n\":" << b.weighted->c_n
       << ",\"v_hat\":" << b.weighted->v_hat << ",\"r0\":" << b.weighted->r0 << "},";
  } else if (!b.weighted_error.empty()) {
    os << "\"weighted_error\":\"" << b.weighted_error << "\",";
  }
  os << "\"hypotheses\":{\"thm_main_vector\":" << (b.flags.main_vector ? "true" : "false")
     << ",\"thm_rosser_iwaniec\":" << (b.flags.rosser_iwaniec ? "true" : "false")
     << ",\"thm_weighted\":" << (b.flags.weighted ? "true" : "false")
     << ",\"cor_hypersurface\":" << (b.flags.hypersurface ? "true" : "false") << "}}";
  return os.str();
}

}  // namespace aplab::constants
