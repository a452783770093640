#include "coopscat/flux.hpp"

#include "coopscat/greens.hpp"
#include "coopscat/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coopscat {

namespace {

// Beyond (w0 sin t / 2)^2 = 40 the drive's angular spectrum is below e^-40.
constexpr double kBeamConeExponent = 40.0;

Vec3 direction_from_angles(double theta, double phi, Hemisphere hemisphere) {
  const double st = std::sin(theta);
  const double ct = std::cos(theta);
  return Vec3(st * std::cos(phi), st * std::sin(phi), hemisphere == Hemisphere::plus_z ? ct : -ct);
}

CVec3 array_sum(const DipoleSolution& solution, const Scene& scene, const Vec3& u) {
  CVec3 s = CVec3::Zero();
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const double phase = -u.dot(scene.positions[i]);
    s += solution.moment(i) * cplx(std::cos(phase), std::sin(phase));
  }
  return s;
}

double beam_cone_angle(double waist, double theta_max) {
  const double sin_split = 2.0 * std::sqrt(kBeamConeExponent) / waist;
  if (sin_split >= std::sin(theta_max)) return theta_max;
  return std::asin(sin_split);
}

double interference_envelope(double waist, double cos_t) {
  if (cos_t <= 0.0) return 0.0;
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  const double x = 0.5 * waist * sin_t;
  return -1.5 * waist * waist * cos_t * std::exp(-x * x);
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw DomainError("Gauss-Legendre order must be >= 1");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (x * p0 - p1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

std::vector<AngularNode> panel_rule(double theta_lo, double theta_hi, Hemisphere hemisphere, int polar, int azimuth) {
  if (polar < 1 || azimuth < 1) throw DomainError("quadrature orders must be positive");
  std::vector<double> t, wt;
  gauss_legendre(polar, t, wt);
  std::vector<AngularNode> nodes;
  nodes.reserve(static_cast<std::size_t>(polar) * static_cast<std::size_t>(azimuth));
  const double half = 0.5 * (theta_hi - theta_lo);
  const double dphi = kTwoPi / azimuth;
  for (int i = 0; i < polar; ++i) {
    const double theta = theta_lo + half * (t[static_cast<std::size_t>(i)] + 1.0);
    const double wtheta = half * wt[static_cast<std::size_t>(i)] * std::sin(theta);
    for (int j = 0; j < azimuth; ++j) {
      const double phi = dphi * (j + 0.5);
      nodes.push_back({direction_from_angles(theta, phi, hemisphere), wtheta * dphi, theta, phi});
    }
  }
  return nodes;
}

std::vector<AngularNode> cap_rule(double na, Hemisphere hemisphere, int polar, int azimuth) {
  if (!(na > 0.0 && na <= 1.0)) throw DomainError("numerical aperture must lie in (0, 1]");
  return panel_rule(0.0, std::asin(na), hemisphere, polar, azimuth);
}

Integral integrate_na(const std::function<double(const Vec3&)>& integrand, double na, Hemisphere hemisphere,
                      const QuadratureOrder& order) {
  auto integrate = [&](int polar, int azimuth) {
    double sum = 0.0;
    for (const auto& node : cap_rule(na, hemisphere, polar, azimuth)) sum += node.weight * integrand(node.direction);
    return sum;
  };
  Integral out;
  out.value = integrate(order.polar, order.azimuth);
  const double coarse = integrate(std::max(2, order.polar / 2), std::max(2, order.azimuth / 2));
  out.error_estimate = std::abs(out.value - coarse);
  return out;
}

CVec3 scattered_far_field(const DipoleSolution& solution, const Scene& scene, const Vec3& direction) {
  const CVec3 s = array_sum(solution, scene, direction);
  const cplx radial = direction.cast<cplx>().dot(s);
  return 1.5 * (s - direction.cast<cplx>() * radial);
}

double dsigma_scattered(const DipoleSolution& solution, const Scene& scene, const Vec3& direction) {
  return scattered_far_field(solution, scene, direction).squaredNorm();
}

double dsigma_interference(const DipoleSolution& solution, const Scene& scene, const ScaledBeam& beam,
                           const Vec3& direction) {
  const double cos_t = beam.direction * direction.z();
  const double envelope = interference_envelope(beam.waist, cos_t);
  if (envelope == 0.0) return 0.0;
  const CVec3 s = array_sum(solution, scene, direction);
  const double fphase = direction.dot(beam.focus);
  const cplx proj = beam.polarization.dot(s) * cplx(std::cos(fphase), std::sin(fphase));
  return envelope * proj.imag();
}

Footprint array_footprint(const LatticeSpec& lattice, const ScaledUnits& units) {
  Footprint f;
  f.center = grid_center(lattice) * units.ka;
  f.width_x = lattice.nx * units.ka;
  f.width_y = lattice.ny * units.ka;
  return f;
}

double incident_cross_section(const ScaledBeam& beam, const Footprint& footprint) {
  if (!(footprint.width_x > 0.0 && footprint.width_y > 0.0)) throw DomainError("footprint is degenerate");
  // integral of exp(-2 u^2 / w^2) from lo to hi
  auto axis = [&](double center, double width, double focus) {
    const double lo = center - 0.5 * width - focus;
    const double hi = center + 0.5 * width - focus;
    const double s = std::numbers::sqrt2 / beam.waist;
    return 0.5 * beam.waist * std::sqrt(kPi / 2.0) * (std::erf(s * hi) - std::erf(s * lo));
  };
  return axis(footprint.center.x(), footprint.width_x, beam.focus.x()) *
         axis(footprint.center.y(), footprint.width_y, beam.focus.y());
}

FluxEvaluator::FluxEvaluator(const ScaledBeam& beam, const DetectionSpec& detection, const Footprint& footprint)
    : FluxEvaluator(beam, detection, footprint, simd::active_kernels()) {}

FluxEvaluator::FluxEvaluator(const ScaledBeam& beam, const DetectionSpec& detection, const Footprint& footprint,
                             const simd::KernelTable& kernels)
    : kernels_(&kernels), beam_(beam), detection_(detection), sigma_in_(incident_cross_section(beam, footprint)) {
  detection.validate();
  const double theta_max = std::asin(detection.numerical_aperture);
  const double split = beam_cone_angle(beam.waist, theta_max);
  const auto& q = detection.quadrature;
  const Hemisphere fwd = beam.direction > 0 ? Hemisphere::plus_z : Hemisphere::minus_z;
  const Hemisphere bwd = beam.direction > 0 ? Hemisphere::minus_z : Hemisphere::plus_z;

  auto build = [&](Hemisphere h, bool forward) {
    std::vector<Node> out;
    auto add_panel = [&](double lo, double hi, int polar, bool cone) {
      for (const auto& n : panel_rule(lo, hi, h, polar, q.azimuth)) {
        const bool intf = forward && cone;
        const double env = intf ? interference_envelope(beam.waist, std::cos(n.polar)) * n.weight : 0.0;
        out.push_back({n, intf, env});
      }
    };
    if (split >= theta_max) {
      add_panel(0.0, theta_max, std::max(q.polar, q.beam_polar), true);
    } else {
      add_panel(0.0, split, q.beam_polar, true);
      add_panel(split, theta_max, q.polar, false);
    }
    return out;
  };
  forward_ = build(fwd, true);
  backward_ = build(bwd, false);
}

std::size_t FluxEvaluator::node_count() const { return forward_.size() + backward_.size(); }

std::vector<Observables> FluxEvaluator::evaluate(const Scene& scene, std::span<const DipoleSolution> solutions) const {
  const std::size_t n = scene.size();
  const std::size_t nsol = solutions.size();
  const bool sigma = scene.model == PolarizationModel::sigma_minus;
  const std::size_t ncomp = sigma ? 1 : 3;

  std::vector<double> xs(n), ys(n), zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = scene.positions[i].x();
    ys[i] = scene.positions[i].y();
    zs[i] = scene.positions[i].z();
  }
  // amplitude planes: [solution][component][emitter]
  std::vector<double> re(nsol * ncomp * n), im(nsol * ncomp * n);
  for (std::size_t r = 0; r < nsol; ++r) {
    const auto& sol = solutions[r];
    if (sol.emitter_count() != n || sol.model != scene.model)
      throw DomainError("solution does not belong to the scene");
    for (std::size_t c = 0; c < ncomp; ++c)
      for (std::size_t i = 0; i < n; ++i) {
        const cplx a = sigma ? sol.amplitudes[static_cast<Eigen::Index>(i)]
                             : sol.amplitudes[static_cast<Eigen::Index>(3 * i + c)];
        re[(r * ncomp + c) * n + i] = a.real();
        im[(r * ncomp + c) * n + i] = a.imag();
      }
  }

  const auto& kt = *kernels_;
  const CVec3 e_sigma = sigma_minus_vector();
  const cplx beam_overlap = beam_.polarization.dot(e_sigma);  // e_b^dagger e_sigma-
  std::vector<double> cbuf(n), sbuf(n);
  std::vector<double> sc_fwd(nsol, 0.0), sc_bwd(nsol, 0.0), intf(nsol, 0.0);

  auto accumulate = [&](const std::vector<Node>& nodes, std::vector<double>& sc_out, bool forward) {
    for (const auto& node : nodes) {
      const Vec3& u = node.angular.direction;
      kt.phase_sincos(xs.data(), ys.data(), zs.data(), n, u.x(), u.y(), u.z(), cbuf.data(), sbuf.data());
      const double fphase = u.dot(beam_.focus);
      const cplx focus_phase(std::cos(fphase), std::sin(fphase));
      const cplx u_dot_e = u.cast<cplx>().transpose() * e_sigma;
      for (std::size_t r = 0; r < nsol; ++r) {
        double dsc;
        cplx proj;
        if (sigma) {
          const cplx s = kt.cdot(cbuf.data(), sbuf.data(), &re[r * n], &im[r * n], n);
          const double s2 = std::norm(s);
          dsc = 2.25 * (s2 - s2 * std::norm(u_dot_e));
          proj = beam_overlap * s;
        } else {
          CVec3 s;
          for (std::size_t c = 0; c < 3; ++c)
            s[static_cast<Eigen::Index>(c)] =
                kt.cdot(cbuf.data(), sbuf.data(), &re[(r * 3 + c) * n], &im[(r * 3 + c) * n], n);
          const cplx radial = u.cast<cplx>().dot(s);
          dsc = 2.25 * (s.squaredNorm() - std::norm(radial));
          proj = beam_.polarization.dot(s);
        }
        sc_out[r] += node.angular.weight * dsc;
        if (forward && node.with_interference) intf[r] += node.interference_weight * (proj * focus_phase).imag();
      }
    }
  };
  accumulate(forward_, sc_fwd, true);
  accumulate(backward_, sc_bwd, false);

  std::vector<Observables> out(nsol);
  for (std::size_t r = 0; r < nsol; ++r) {
    auto& o = out[r];
    o.sigma_in = sigma_in_;
    o.numerical_aperture = detection_.numerical_aperture;
    o.sigma_sc_backward = sc_bwd[r];
    o.sigma_sc_forward = sc_fwd[r];
    o.sigma_intf_forward = intf[r];
    o.reflectance = sc_bwd[r] / sigma_in_;
    o.absorptance = -(sc_fwd[r] + intf[r]) / sigma_in_;
    o.transmittance = 1.0 - o.absorptance;
  }
  return out;
}

Observables observables(const DipoleSolution& solution, const Scene& scene, const ScaledBeam& beam,
                        const DetectionSpec& detection, const Footprint& footprint) {
  const FluxEvaluator eval(beam, detection, footprint);
  return eval.evaluate(scene, std::span<const DipoleSolution>(&solution, 1)).front();
}

double total_scattered_cross_section(const DipoleSolution& solution, const Scene& scene, const QuadratureOrder& order) {
  double total = 0.0;
  for (auto h : {Hemisphere::plus_z, Hemisphere::minus_z})
    for (const auto& node : cap_rule(1.0, h, order.polar, order.azimuth))
      total += node.weight * dsigma_scattered(solution, scene, node.direction);
  return total;
}

double extinction_cross_section(const DipoleSolution& solution, const Scene& scene, const ScaledBeam& beam) {
  double s = 0.0;
  for (std::size_t i = 0; i < scene.size(); ++i)
    s += drive_field(beam, scene.positions[i]).dot(solution.moment(i)).imag();
  return 6.0 * kPi * s;
}

std::vector<NearFieldPoint> near_field_intensity(const DipoleSolution& solution, const Scene& scene,
                                                 const ScaledBeam& beam, const std::vector<Vec3>& points,
                                                 double exclusion_radius) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<CVec3> moments(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) moments[i] = solution.moment(i);
  std::vector<NearFieldPoint> out;
  out.reserve(points.size());
  for (const auto& r : points) {
    NearFieldPoint p;
    p.position = r;
    CVec3 esc = CVec3::Zero();
    for (std::size_t j = 0; j < scene.size() && !p.masked; ++j) {
      const Vec3 d = r - scene.positions[j];
      if (d.norm() < exclusion_radius) {
        p.masked = true;
        break;
      }
      esc += dyadic_green(d) * moments[j];
    }
    if (p.masked) {
      p.total_intensity = nan;
      p.scattered_intensity = nan;
    } else {
      p.scattered_intensity = esc.squaredNorm();
      p.total_intensity = (drive_field(beam, r) + esc).squaredNorm();
    }
    out.push_back(p);
  }
  return out;
}

Observables mirror_reference(const ScaledBeam& beam, double side, const DetectionSpec& detection) {
  if (!(side > 0.0)) throw DomainError("mirror aperture side must be > 0");
  detection.validate();
  const double w = beam.waist;
  // 1D transform of the truncated Gaussian profile, F(q) = int exp(-x^2/w^2 - i q x) dx.
  const int nx = std::max(128, static_cast<int>(std::ceil(2.0 * side)) + 64);
  std::vector<double> t, wt;
  gauss_legendre(nx, t, wt);
  std::vector<double> xs(static_cast<std::size_t>(nx)), gx(static_cast<std::size_t>(nx));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = 0.5 * side * t[i];
    gx[i] = 0.5 * side * wt[i] * std::exp(-xs[i] * xs[i] / (w * w));
  }
  auto transform = [&](double q) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += gx[i] * cplx(std::cos(q * xs[i]), -std::sin(q * xs[i]));
    return s;
  };

  Footprint fp;
  fp.width_x = side;
  fp.width_y = side;
  ScaledBeam centred = beam;
  centred.focus = Vec3::Zero();
  const double sigma_in = incident_cross_section(centred, fp);

  const double theta_max = std::asin(detection.numerical_aperture);
  const double split = beam_cone_angle(w, theta_max);
  const auto& q = detection.quadrature;
  std::vector<AngularNode> nodes;
  if (split >= theta_max) {
    nodes = panel_rule(0.0, theta_max, Hemisphere::plus_z, std::max(q.polar, q.beam_polar), q.azimuth);
  } else {
    nodes = panel_rule(0.0, split, Hemisphere::plus_z, q.beam_polar, q.azimuth);
    const auto outer = panel_rule(split, theta_max, Hemisphere::plus_z, q.polar, q.azimuth);
    nodes.insert(nodes.end(), outer.begin(), outer.end());
  }

  double sc = 0.0, intf = 0.0;
  const double norm = 1.0 / (4.0 * kPi * kPi);
  for (const auto& n : nodes) {
    const double qx = n.direction.x();
    const double qy = n.direction.y();
    // dk_x dk_y = cos(theta) dOmega, so power is conserved exactly at NA = 1
    const double c = n.direction.z();
    const cplx patch = transform(qx) * transform(qy);
    const double inc = kPi * w * w * std::exp(-0.25 * (qx * qx + qy * qy) * w * w);
    sc += n.weight * norm * c * std::norm(patch);
    intf += n.weight * norm * c * (-2.0 * inc * patch.real());
  }
  Observables o;
  o.sigma_in = sigma_in;
  o.numerical_aperture = detection.numerical_aperture;
  o.sigma_sc_backward = sc;
  o.sigma_sc_forward = sc;
  o.sigma_intf_forward = intf;
  o.reflectance = sc / sigma_in;
  o.absorptance = -(sc + intf) / sigma_in;
  o.transmittance = 1.0 - o.absorptance;
  return o;
}

std::vector<AngularSample> angular_distribution(const DipoleSolution& solution, const Scene& scene,
                                                const ScaledBeam& beam, int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw DomainError("angular grid must be non-empty");
  std::vector<AngularSample> out;
  out.reserve(static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi));
  for (int i = 0; i < n_theta; ++i) {
    const double theta = kPi * (i + 0.5) / n_theta;
    for (int j = 0; j < n_phi; ++j) {
      const double phi = kTwoPi * j / n_phi;
      const Vec3 u = direction_from_angles(theta, phi, Hemisphere::plus_z);
      AngularSample a;
      a.theta = theta;
      a.phi = phi;
      a.dsigma_sc = dsigma_scattered(solution, scene, u);
      a.dsigma_intf = dsigma_interference(solution, scene, beam, u);
      out.push_back(a);
    }
  }
  return out;
}

}  // namespace coopscat
