/*
 * Copyright 2026 The ILE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "ile/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "ile/io.hpp"
#include "ile/json_util.hpp"

namespace ile {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ParameterError(msg);
}

int label_index(const LabelList& list, const Label& y, const char* what) {
  for (std::size_t i = 0; i < list.size(); ++i)
    if (same_label(list[i], y)) return static_cast<int>(i);
  throw InputError(std::string(what) + ": label " + format_label(y) + " is not in the table");
}

void check_dim(const Label& v, int dim, const char* what) {
  if (v.size() != dim)
    throw InputError(std::string(what) + ": expected a label of length " + std::to_string(dim) + ", got " +
                     std::to_string(v.size()));
}

// Attaches the finite-table embedding and its bound to a loss on finite sets.
void attach_finite(LossSpec& loss) {
  auto fe = std::make_shared<const FiniteEmbedding>(finite_embedding(loss));
  loss.closs_bound = fe->closs_bound;
  loss.embedding = explicit_from_finite(fe);
}

LossSpec zero_one(int T) {
  require(T >= 2, "zero_one: need T >= 2 classes");
  LossSpec l;
  l.id = "zero_one";
  l.params = {{"T", T}};
  l.output_space = Space::classes(T);
  l.label_space = Space::classes(T);
  l.eval = [](const Label& z, const Label& y) { return same_label(z, y) ? 0.0 : 1.0; };
  attach_finite(l);
  return l;
}

LossSpec constant_loss(double value, int T) {
  require(T >= 1, "constant: need T >= 1");
  require(std::isfinite(value), "constant: value must be finite");
  LossSpec l;
  l.id = "constant";
  l.params = {{"value", value}, {"T", T}};
  l.output_space = Space::classes(T);
  l.label_space = Space::classes(T);
  l.eval = [value](const Label&, const Label&) { return value; };
  attach_finite(l);
  return l;
}

LossSpec table_loss(LabelList Z, LabelList Y, const Matrix& V) {
  require(!Z.empty() && !Y.empty(), "table: outputs and labels must be nonempty");
  require(V.rows() == static_cast<Eigen::Index>(Z.size()) && V.cols() == static_cast<Eigen::Index>(Y.size()),
          "table: V must be |outputs| x |labels|");
  require(V.allFinite(), "table: V has non-finite entries");
  LossSpec l;
  l.id = "table";
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < V.rows(); ++i) rows.push_back(vector_to_json(V.row(i).transpose()));
  l.params = {{"outputs", labels_to_json(Z)}, {"labels", labels_to_json(Y)}, {"V", rows}};
  l.output_space = Space::finite(Z);
  l.label_space = Space::finite(Y);
  l.eval = [Z, Y, V](const Label& z, const Label& y) {
    return V(label_index(Z, z, "table"), label_index(Y, y, "table"));
  };
  attach_finite(l);
  return l;
}

LossSpec squared_euclidean(int d, double radius) {
  require(d >= 1, "squared_euclidean: need d >= 1");
  require(radius > 0 && std::isfinite(radius), "squared_euclidean: radius must be positive");
  LossSpec l;
  l.id = "squared_euclidean";
  l.params = {{"d", d}, {"radius", radius}};
  l.output_space = Space::cube(d, radius);
  l.label_space = l.output_space;
  l.eval = [d](const Label& z, const Label& y) {
    check_dim(z, d, "squared_euclidean");
    check_dim(y, d, "squared_euclidean");
    return (z - y).squaredNorm();
  };
  l.subgradient = [](const Label& z, const Label& y) -> Vector { return 2.0 * (z - y); };
  // phi_bar(y) = (1, |y|^2, y), psi_bar(z) = (|z|^2, 1, -2z), with |y| <= R.
  const double R2 = radius * radius * d;
  const double Phi = std::sqrt(1.0 + R2 * R2 + R2);
  l.closs_bound = std::sqrt(R2 * R2 + 4.0 * R2 + 1.0) * Phi;
  ExplicitEmbedding e;
  e.dim = d + 2;
  e.psi = [Phi, d](const Label& z) {
    Vector v(d + 2);
    v << z.squaredNorm(), 1.0, -2.0 * z;
    return Vector(Phi * v);
  };
  e.phi = [Phi, d](const Label& y) {
    Vector v(d + 2);
    v << 1.0, y.squaredNorm(), y;
    return Vector(v / Phi);
  };
  l.embedding = std::move(e);
  return l;
}

LossSpec hellinger(int bins) {
  require(bins >= 2, "hellinger: need bins >= 2");
  LossSpec l;
  l.id = "hellinger";
  l.params = {{"bins", bins}};
  l.output_space = Space::simplex(bins);
  l.label_space = l.output_space;
  l.eval = [bins](const Label& z, const Label& y) {
    check_dim(z, bins, "hellinger");
    check_dim(y, bins, "hellinger");
    double s = 0.0;
    for (int j = 0; j < bins; ++j) {
      const double d = std::sqrt(std::max(z(j), 0.0)) - std::sqrt(std::max(y(j), 0.0));
      s += d * d;
    }
    return s;
  };
  l.subgradient = [](const Label& z, const Label& y) {
    Vector g(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j)
      g(j) = 1.0 - std::sqrt(std::max(y(j), 0.0) / std::max(z(j), 1e-300));
    return g;
  };
  // On the simplex the loss is 2 - 2<sqrt z, sqrt y>.
  const double Phi = std::sqrt(2.0);
  l.closs_bound = 4.0;
  ExplicitEmbedding e;
  e.dim = bins + 1;
  e.psi = [Phi, bins](const Label& z) {
    Vector v(bins + 1);
    v(0) = 2.0;
    for (int j = 0; j < bins; ++j) v(j + 1) = -2.0 * std::sqrt(std::max(z(j), 0.0));
    return Vector(Phi * v);
  };
  e.phi = [Phi, bins](const Label& y) {
    Vector v(bins + 1);
    v(0) = 1.0;
    for (int j = 0; j < bins; ++j) v(j + 1) = std::sqrt(std::max(y(j), 0.0));
    return Vector(v / Phi);
  };
  l.embedding = std::move(e);
  return l;
}

// Angle between unit vectors. 2 atan2(|z-y|, |z+y|) keeps full precision
// near 0 and pi, where acos of the inner product loses half the digits.
double geodesic_angle(const Label& z, const Label& y) { return 2.0 * std::atan2((z - y).norm(), (z + y).norm()); }

// Unit tangent at z, used when the geodesic direction is undefined.
Vector any_tangent(const Vector& z) {
  Eigen::Index k = 0;
  z.cwiseAbs().minCoeff(&k);
  Vector t = Vector::Unit(z.size(), k);
  t -= t.dot(z) * z;
  return t / t.norm();
}

LossSpec geodesic_sphere_sq(int d) {
  require(d >= 2, "geodesic_sphere_sq: need dimension >= 2");
  LossSpec l;
  l.id = "geodesic_sphere_sq";
  l.params = {{"d", d}};
  l.output_space = Space::sphere(d);
  l.label_space = l.output_space;
  l.eval = [d](const Label& z, const Label& y) {
    check_dim(z, d, "geodesic_sphere_sq");
    check_dim(y, d, "geodesic_sphere_sq");
    const double theta = geodesic_angle(z, y);
    return theta * theta;
  };
  // Riemannian gradient: -2 theta (y - <z,y> z) / sin(theta).
  l.subgradient = [](const Label& z, const Label& y) -> Vector {
    const double c = std::clamp(z.dot(y), -1.0, 1.0);
    const double theta = geodesic_angle(z, y);
    const double s = std::sin(theta);
    if (s < 1e-12) {
      if (theta < 1.0) return Vector::Zero(z.size());
      return -2.0 * theta * any_tangent(z);
    }
    return -2.0 * theta / s * (y - c * z);
  };
  return l;
}

LossSpec absolute_loss(double lo, double hi) {
  require(lo < hi, "absolute: need lo < hi");
  LossSpec l;
  l.id = "absolute";
  l.params = {{"lo", lo}, {"hi", hi}};
  l.output_space = Space::interval(lo, hi);
  l.label_space = l.output_space;
  l.eval = [](const Label& z, const Label& y) {
    check_dim(z, 1, "absolute");
    check_dim(y, 1, "absolute");
    return std::abs(z(0) - y(0));
  };
  l.subgradient = [](const Label& z, const Label& y) {
    const double u = z(0) - y(0);
    return scalar_label(u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0));
  };
  return l;
}

LossSpec huber_loss(double delta, double lo, double hi) {
  require(delta > 0, "huber: delta must be positive");
  require(lo < hi, "huber: need lo < hi");
  LossSpec l;
  l.id = "huber";
  l.params = {{"delta", delta}, {"lo", lo}, {"hi", hi}};
  l.output_space = Space::interval(lo, hi);
  l.label_space = l.output_space;
  l.eval = [delta](const Label& z, const Label& y) {
    check_dim(z, 1, "huber");
    check_dim(y, 1, "huber");
    const double a = std::abs(z(0) - y(0));
    return a <= delta ? 0.5 * a * a : delta * (a - 0.5 * delta);
  };
  l.subgradient = [delta](const Label& z, const Label& y) {
    return scalar_label(std::clamp(z(0) - y(0), -delta, delta));
  };
  return l;
}

LossSpec hinge_loss() {
  LossSpec l;
  l.id = "hinge";
  l.output_space = Space::finite({scalar_label(-1.0), scalar_label(1.0)});
  l.label_space = Space::interval(-1.0, 1.0);
  l.eval = [](const Label& z, const Label& y) {
    check_dim(z, 1, "hinge");
    check_dim(y, 1, "hinge");
    return std::max(0.0, 1.0 - z(0) * y(0));
  };
  auto sf = std::make_shared<const SemiFiniteEmbedding>(semi_finite_embedding(l));
  l.closs_bound = sf->bound;
  l.params = {{"raw_sup", sf->raw_sup}, {"inflation", sf->inflation}};
  l.embedding = ExplicitEmbedding{sf->dim(), [sf](const Label& z) { return sf->psi(z); },
                                  [sf](const Label& y) { return sf->phi(y); }};
  return l;
}

}  // namespace

nlohmann::json LossSpec::config() const {
  nlohmann::json j = params.is_object() ? params : nlohmann::json::object();
  j["id"] = id;
  return j;
}

nlohmann::json LossSpec::bound_json() const {
  if (closs_bound) return *closs_bound;
  return "unknown";
}

LossSpec make_loss(const nlohmann::json& config) {
  if (!config.is_object() || !config.contains("id")) throw ParameterError("loss config needs an 'id'");
  const auto id = config.at("id").get<std::string>();
  auto num = [&config](const char* key, double def) {
    return config.contains(key) ? config.at(key).get<double>() : def;
  };
  auto integer = [&config, &id](const char* key, std::optional<int> def = std::nullopt) {
    if (config.contains(key)) return config.at(key).get<int>();
    if (!def) throw ParameterError(id + ": missing parameter '" + key + "'");
    return *def;
  };
  try {
    if (id == "zero_one") return zero_one(integer("T"));
    if (id == "squared_euclidean") return squared_euclidean(integer("d", 1), num("radius", 1.0));
    if (id == "hellinger") return hellinger(integer("bins"));
    if (id == "geodesic_sphere_sq") return geodesic_sphere_sq(integer("d", 2));
    if (id == "absolute") return absolute_loss(num("lo", -1.0), num("hi", 1.0));
    if (id == "huber") return huber_loss(num("delta", 1.0), num("lo", -1.0), num("hi", 1.0));
    if (id == "hinge") return hinge_loss();
    if (id == "constant") return constant_loss(num("value", 0.0), integer("T", 2));
    if (id == "table") {
      const auto& rows = config.at("V");
      const LabelList Z = labels_from_json(config.at("outputs"));
      const LabelList Y = labels_from_json(config.at("labels"));
      Matrix V(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(Y.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = rows[i].get<std::vector<double>>();
        require(r.size() == Y.size(), "table: every row of V needs |labels| entries");
        for (std::size_t j = 0; j < r.size(); ++j) V(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[j];
      }
      return table_loss(Z, Y, V);
    }
    if (id == "kde") {
      const auto kernel = config.at("kernel").get<KernelSpec>();
      const int dim = integer("dim", 2);
      Space space = config.contains("space") ? Space::from_json(config.at("space"))
                    : kernel.family == KernelFamily::Linear ? Space::sphere(dim)
                                                             : Space::cube(dim, 1.0);
      return kde_loss_from_kernel(kernel, space);
    }
    if (id == "sum" || id == "product")
      return combine(make_loss(config.at("first")), make_loss(config.at("second")),
                     id == "sum" ? CombineMode::Sum : CombineMode::Product);
    if (id == "restrict")
      return restrict(make_loss(config.at("base")), Space::from_json(config.at("outputs")),
                      Space::from_json(config.at("labels")));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(id + ": " + e.what());
  }
  throw ParameterError("unknown loss id '" + id + "'");
}

double operator_norm(const Matrix& V, double rel_tol, int max_iter) {
  if (V.size() == 0) return 0.0;
  const Matrix G = V.transpose() * V;
  if (G.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  // Start from the all-ones direction plus a small ramp so that it is not
  // orthogonal to the top eigenvector for symmetric tables.
  Vector x(G.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 1.0 + 1e-3 * static_cast<double>(i + 1);
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector y = G * x;
    const double nrm = y.norm();
    if (nrm == 0.0) break;
    const double next = x.dot(y);
    x = y / nrm;
    if (std::abs(next - lambda) <= rel_tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

double FiniteEmbedding::reconstruction_error() const {
  double err = 0.0;
  for (Eigen::Index i = 0; i < V.rows(); ++i)
    for (Eigen::Index j = 0; j < V.cols(); ++j) err = std::max(err, std::abs(psi.row(i).dot(phi.row(j)) - V(i, j)));
  return err;
}

double FiniteEmbedding::max_phi_norm() const { return phi.rowwise().norm().maxCoeff(); }

double FiniteEmbedding::max_psi_norm() const { return psi.rowwise().norm().maxCoeff(); }

void FiniteEmbedding::write_csv(std::ostream& os) const {
  CsvTable t;
  t.header.push_back("z\\y");
  for (const auto& y : labels) t.header.push_back(format_label(y));
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    std::vector<std::string> row{format_label(outputs[i])};
    for (Eigen::Index j = 0; j < V.cols(); ++j) row.push_back(format_double(V(static_cast<Eigen::Index>(i), j)));
    t.rows.push_back(std::move(row));
  }
  ile::write_csv(os, t);
}

FiniteEmbedding finite_embedding(const LossSpec& loss, const LabelList& Z, const LabelList& Y) {
  if (Z.empty() || Y.empty()) throw InputError("finite_embedding: output and label lists must be nonempty");
  FiniteEmbedding fe;
  fe.outputs = Z;
  fe.labels = Y;
  const auto p = static_cast<Eigen::Index>(Z.size());
  const auto q = static_cast<Eigen::Index>(Y.size());
  fe.V.resize(p, q);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < q; ++j) {
      const double v = loss(Z[static_cast<std::size_t>(i)], Y[static_cast<std::size_t>(j)]);
      if (!std::isfinite(v)) throw NumericError("finite_embedding: non-finite loss value in the table");
      fe.V(i, j) = v;
    }
  // phi_bar = one-hot rows, so sup |phi_bar| = 1 and the normalization is the identity.
  const Matrix phi_bar = Matrix::Identity(q, q);
  fe.scale = phi_bar.rowwise().norm().maxCoeff();
  fe.phi = phi_bar / fe.scale;
  fe.psi = fe.scale * fe.V;
  // Power iteration approaches |V| from below; the largest row norm is a
  // certified lower bound on |V| as well and dominates sup |psi| exactly.
  fe.closs_bound = std::max(operator_norm(fe.V), fe.max_psi_norm());
  return fe;
}

FiniteEmbedding finite_embedding(const LossSpec& loss) {
  return finite_embedding(loss, loss.output_space.elements(), loss.label_space.elements());
}

ExplicitEmbedding explicit_from_finite(std::shared_ptr<const FiniteEmbedding> fe) {
  ExplicitEmbedding e;
  e.dim = static_cast<int>(fe->phi.cols());
  e.psi = [fe](const Label& z) -> Vector {
    return fe->psi.row(label_index(fe->outputs, z, "finite embedding")).transpose();
  };
  e.phi = [fe](const Label& y) -> Vector {
    return fe->phi.row(label_index(fe->labels, y, "finite embedding")).transpose();
  };
  return e;
}

Vector SemiFiniteEmbedding::psi(const Label& z) const {
  if (finite_side == Side::Outputs) {
    const int i = label_index(finite_elements, z, "semi-finite embedding");
    return bound * Vector::Unit(dim(), i);
  }
  Vector v(dim());
  for (int j = 0; j < dim(); ++j) v(j) = loss(z, finite_elements[static_cast<std::size_t>(j)]);
  return v;
}

Vector SemiFiniteEmbedding::phi(const Label& y) const {
  if (finite_side == Side::Labels) return Vector::Unit(dim(), label_index(finite_elements, y, "semi-finite embedding"));
  Vector v(dim());
  if (bound == 0.0) return Vector::Zero(dim());
  for (int i = 0; i < dim(); ++i) v(i) = loss(finite_elements[static_cast<std::size_t>(i)], y) / bound;
  return v;
}

SemiFiniteEmbedding semi_finite_embedding(const LossSpec& loss, const SemiFiniteOptions& opts) {
  if (!(opts.inflation >= 1.0)) throw ParameterError("semi_finite_embedding: inflation must be >= 1");
  SemiFiniteEmbedding sf;
  sf.loss = loss.eval;
  sf.inflation = opts.inflation;
  const Space* other = nullptr;
  if (loss.output_space.is_finite()) {
    sf.finite_side = SemiFiniteEmbedding::Side::Outputs;
    sf.finite_elements = loss.output_space.elements();
    other = &loss.label_space;
  } else if (loss.label_space.is_finite()) {
    sf.finite_side = SemiFiniteEmbedding::Side::Labels;
    sf.finite_elements = loss.label_space.elements();
    other = &loss.output_space;
  } else {
    throw CapabilityError("semi_finite_embedding: neither side of '" + loss.id + "' is finite");
  }
  if (sf.finite_elements.empty()) throw InputError("semi_finite_embedding: empty finite side");
  LabelList pts = other->grid(opts.grid_points);
  if (pts.empty()) {
    Rng rng(opts.seed);
    pts = other->sample(opts.sample_points, rng);
  }
  const bool outputs_finite = sf.finite_side == SemiFiniteEmbedding::Side::Outputs;
  double best = 0.0;
  for (const auto& u : pts) {
    double s = 0.0;
    for (const auto& f : sf.finite_elements) {
      const double v = outputs_finite ? loss(f, u) : loss(u, f);
      if (!std::isfinite(v))
        throw NumericError("semi_finite_embedding: loss is not finite at " + format_label(u) +
                           "; cannot bound sup |phi|");
      s += v * v;
    }
    best = std::max(best, s);
  }
  sf.evaluated_points = pts.size();
  sf.raw_sup = std::sqrt(best);
  sf.bound = sf.raw_sup * sf.inflation;
  return sf;
}

double FourierEmbedding::omega(int k) const { return 2.0 * kPi * k / period; }

Vector FourierEmbedding::psi(double z) const {
  const double A = std::sqrt(closs_estimate);
  Vector v(2 * static_cast<Eigen::Index>(coeffs.size()));
  for (int k = -truncation; k <= truncation; ++k) {
    const auto& c = coeff(k);
    const double a = A * std::sqrt(std::abs(c));
    const double arg = omega(k) * z + std::arg(c);
    const auto m = 2 * static_cast<Eigen::Index>(k + truncation);
    v(m) = a * std::cos(arg);
    v(m + 1) = a * std::sin(arg);
  }
  return v;
}

Vector FourierEmbedding::phi(double y) const {
  const double A = std::sqrt(closs_estimate);
  Vector v = Vector::Zero(2 * static_cast<Eigen::Index>(coeffs.size()));
  if (A == 0.0) return v;
  for (int k = -truncation; k <= truncation; ++k) {
    const double a = std::sqrt(std::abs(coeff(k))) / A;
    const double arg = omega(k) * y;
    const auto m = 2 * static_cast<Eigen::Index>(k + truncation);
    v(m) = a * std::cos(arg);
    v(m + 1) = a * std::sin(arg);
  }
  return v;
}

double FourierEmbedding::series(double u) const {
  double s = 0.0;
  for (int k = -truncation; k <= truncation; ++k) s += (coeff(k) * std::polar(1.0, omega(k) * u)).real();
  return s;
}

namespace {

FourierEmbedding finish_fourier(FourierEmbedding fe, const ProfileFn& v, const FourierOptions& opts) {
  double total = 0.0;
  for (const auto& c : fe.coeffs) total += std::abs(c);
  fe.closs_estimate = total;

  // Sup error over u = z - y with z = u/2, y = -u/2, through the maps themselves.
  const double U = std::min(2.0 * fe.box, 0.5 * fe.period);
  double err = 0.0;
  for (int i = 0; i < opts.test_points; ++i) {
    const double u = opts.test_points == 1 ? 0.0 : -U + 2.0 * U * i / (opts.test_points - 1);
    const double approx = fe.psi(0.5 * u).dot(fe.phi(-0.5 * u));
    err = std::max(err, std::abs(approx - v(u)));
  }
  fe.reconstruction_error = err;

  // Decay check: fit log(|c_k| + |c_-k|) against log k over the upper half.
  if (fe.truncation >= 8 && total > 0.0) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int k = fe.truncation / 2; k <= fe.truncation; ++k) {
      const double a = std::abs(fe.coeff(k)) + std::abs(fe.coeff(-k));
      if (a <= 1e-15 * total) continue;
      const double x = std::log(static_cast<double>(k));
      const double y = std::log(a);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    if (m >= 3) {
      const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      if (slope > -1.1)
        fe.warning = "Fourier coefficients decay like k^" + format_double(slope) +
                     "; sum |c_k| may diverge as the truncation grows";
    }
  }
  return fe;
}

FourierEmbedding fourier_base(const FourierOptions& opts) {
  if (opts.truncation < 1) throw ParameterError("fourier_embedding: truncation must be >= 1");
  if (!(opts.box > 0) || !std::isfinite(opts.box)) throw ParameterError("fourier_embedding: box must be positive");
  if (opts.test_points < 1) throw ParameterError("fourier_embedding: need test points");
  FourierEmbedding fe;
  fe.box = opts.box;
  fe.period = opts.period > 0 ? opts.period : 4.0 * opts.box;
  fe.truncation = opts.truncation;
  fe.coeffs.assign(static_cast<std::size_t>(2 * opts.truncation + 1), {0.0, 0.0});
  return fe;
}

}  // namespace

FourierEmbedding fourier_embedding(const ProfileFn& v, const FourierOptions& opts) {
  FourierEmbedding fe = fourier_base(opts);
  const int N = opts.quadrature_points;
  if (N < 2 * opts.truncation + 1) throw ParameterError("fourier_embedding: too few quadrature points for the truncation");
  std::vector<double> samples(static_cast<std::size_t>(N));
  for (int m = 0; m < N; ++m) {
    samples[static_cast<std::size_t>(m)] = v(-0.5 * fe.period + fe.period * m / N);
    if (!std::isfinite(samples[static_cast<std::size_t>(m)]))
      throw NumericError("fourier_embedding: profile is not finite on the period");
  }
  for (int k = -fe.truncation; k <= fe.truncation; ++k) {
    std::complex<double> c{0.0, 0.0};
    for (int m = 0; m < N; ++m) {
      const double u = -0.5 * fe.period + fe.period * m / N;
      c += samples[static_cast<std::size_t>(m)] * std::polar(1.0, -fe.omega(k) * u);
    }
    fe.coeffs[static_cast<std::size_t>(k + fe.truncation)] = c / static_cast<double>(N);
  }
  // Real profiles have conjugate-symmetric coefficients; enforce it exactly.
  for (int k = 1; k <= fe.truncation; ++k) {
    const auto avg = 0.5 * (fe.coeff(k) + std::conj(fe.coeff(-k)));
    fe.coeffs[static_cast<std::size_t>(k + fe.truncation)] = avg;
    fe.coeffs[static_cast<std::size_t>(-k + fe.truncation)] = std::conj(avg);
  }
  fe.coeffs[static_cast<std::size_t>(fe.truncation)] = {fe.coeff(0).real(), 0.0};
  return finish_fourier(std::move(fe), v, opts);
}

FourierEmbedding fourier_embedding(const ProfileFn& v, const CoefficientFn& coeff, const FourierOptions& opts) {
  FourierEmbedding fe = fourier_base(opts);
  for (int k = -fe.truncation; k <= fe.truncation; ++k) fe.coeffs[static_cast<std::size_t>(k + fe.truncation)] = coeff(k);
  return finish_fourier(std::move(fe), v, opts);
}

LossSpec combine(const LossSpec& a, const LossSpec& b, CombineMode mode) {
  const bool sum = mode == CombineMode::Sum;
  LossSpec l;
  l.id = sum ? "sum" : "product";
  l.params = {{"first", a.config()}, {"second", b.config()}};
  l.output_space = Space::product(a.output_space, b.output_space);
  l.label_space = Space::product(a.label_space, b.label_space);
  const int zd = a.output_space.label_dim();
  const int yd = a.label_space.label_dim();
  const LossFn fa = a.eval;
  const LossFn fb = b.eval;
  l.eval = [=](const Label& z, const Label& y) {
    const double va = fa(z.head(zd), y.head(yd));
    const double vb = fb(z.tail(z.size() - zd), y.tail(y.size() - yd));
    return sum ? va + vb : va * vb;
  };
  if (a.subgradient && b.subgradient) {
    const SubgradientFn ga = a.subgradient;
    const SubgradientFn gb = b.subgradient;
    l.subgradient = [=](const Label& z, const Label& y) {
      const Label z1 = z.head(zd), z2 = z.tail(z.size() - zd);
      const Label y1 = y.head(yd), y2 = y.tail(y.size() - yd);
      Vector g1 = ga(z1, y1);
      Vector g2 = gb(z2, y2);
      if (!sum) {
        g1 *= fb(z2, y2);
        g2 *= fa(z1, y1);
      }
      Vector g(g1.size() + g2.size());
      g << g1, g2;
      return g;
    };
  }
  if (!a.closs_bound || !b.closs_bound) return l;
  const double c1 = *a.closs_bound;
  const double c2 = *b.closs_bound;
  l.closs_bound = sum ? c1 + c2 : c1 * c2;
  if (!a.embedding || !b.embedding) return l;
  const ExplicitEmbedding ea = *a.embedding;
  const ExplicitEmbedding eb = *b.embedding;
  ExplicitEmbedding e;
  if (sum) {
    // Weighted direct sum: phi = (sqrt(w1) phi1, sqrt(w2) phi2) keeps |phi| <= 1
    // and psi = (psi1 / sqrt(w1), psi2 / sqrt(w2)) has norm <= c1 + c2.
    const double total = c1 + c2;
    const bool use_a = c1 > 0.0;
    const bool use_b = c2 > 0.0;
    const double sa = use_a ? std::sqrt(c1 / total) : 0.0;
    const double sb = use_b ? std::sqrt(c2 / total) : 0.0;
    e.dim = std::max(1, (use_a ? ea.dim : 0) + (use_b ? eb.dim : 0));
    const int dim = e.dim;
    e.psi = [=](const Label& z) {
      Vector v = Vector::Zero(dim);
      Eigen::Index off = 0;
      if (use_a) {
        v.segment(off, ea.dim) = ea.psi(z.head(zd)) / sa;
        off += ea.dim;
      }
      if (use_b) v.segment(off, eb.dim) = eb.psi(z.tail(z.size() - zd)) / sb;
      return v;
    };
    e.phi = [=](const Label& y) {
      Vector v = Vector::Zero(dim);
      Eigen::Index off = 0;
      if (use_a) {
        v.segment(off, ea.dim) = sa * ea.phi(y.head(yd));
        off += ea.dim;
      }
      if (use_b) v.segment(off, eb.dim) = sb * eb.phi(y.tail(y.size() - yd));
      return v;
    };
  } else {
    e.dim = ea.dim * eb.dim;
    auto kron = [](const Vector& u, const Vector& v) {
      Vector out(u.size() * v.size());
      for (Eigen::Index i = 0; i < u.size(); ++i) out.segment(i * v.size(), v.size()) = u(i) * v;
      return out;
    };
    e.psi = [=](const Label& z) { return kron(ea.psi(z.head(zd)), eb.psi(z.tail(z.size() - zd))); };
    e.phi = [=](const Label& y) { return kron(ea.phi(y.head(yd)), eb.phi(y.tail(y.size() - yd))); };
  }
  l.embedding = std::move(e);
  return l;
}

LossSpec restrict(const LossSpec& loss, const Space& outputs, const Space& labels) {
  auto check = [](const Space& sub, const Space& full, const char* side) {
    if (sub.label_dim() != full.label_dim())
      throw InputError(std::string("restrict: ") + side + " have the wrong label dimension");
    if (!sub.is_finite()) return;
    for (const auto& e : sub.elements())
      if (!full.contains(e)) throw InputError(std::string("restrict: ") + side + " element " + format_label(e) +
                                              " lies outside " + full.describe());
  };
  check(outputs, loss.output_space, "outputs");
  check(labels, loss.label_space, "labels");
  LossSpec l = loss;
  l.params = {{"base", loss.config()}, {"outputs", outputs.to_json()}, {"labels", labels.to_json()}};
  l.id = "restrict";
  l.output_space = outputs;
  l.label_space = labels;
  return l;
}

LossSpec kde_loss_from_kernel(const KernelSpec& kernel, const Space& space) {
  kernel.validate();
  LossSpec l;
  l.id = "kde";
  l.params = {{"kernel", kernel}, {"dim", space.label_dim()}, {"space", space.to_json()}};
  l.output_space = space;
  l.label_space = space;
  l.eval = [kernel](const Label& z, const Label& y) {
    return eval_kernel(kernel, z, z) + eval_kernel(kernel, y, y) - 2.0 * eval_kernel(kernel, z, y);
  };
  const double eta_sq = kernel.kappa_sq();
  l.closs_bound = 2.0 * (2.0 * eta_sq * eta_sq + 1.0);
  switch (kernel.family) {
    case KernelFamily::Gaussian:
      l.subgradient = [kernel](const Label& z, const Label& y) -> Vector {
        const double s2 = kernel.sigma * kernel.sigma;
        return 4.0 * eval_kernel(kernel, z, y) / s2 * (z - y);
      };
      break;
    case KernelFamily::Laplacian:
      l.subgradient = [kernel](const Label& z, const Label& y) -> Vector {
        const double r = (z - y).norm();
        if (r == 0.0) return Vector::Zero(z.size());
        return 2.0 * eval_kernel(kernel, z, y) / (kernel.sigma * r) * (z - y);
      };
      break;
    case KernelFamily::Linear: {
      l.subgradient = [](const Label& z, const Label& y) -> Vector { return 2.0 * (z - y); };
      // Same construction as the squared euclidean loss on the ball of radius r.
      const double r2 = eta_sq;
      const double Phi = std::sqrt(1.0 + r2 * r2 + r2);
      const int d = space.label_dim();
      ExplicitEmbedding e;
      e.dim = d + 2;
      e.psi = [Phi, d](const Label& z) {
        Vector v(d + 2);
        v << z.squaredNorm(), 1.0, -2.0 * z;
        return Vector(Phi * v);
      };
      e.phi = [Phi, d](const Label& y) {
        Vector v(d + 2);
        v << 1.0, y.squaredNorm(), y;
        return Vector(v / Phi);
      };
      l.embedding = std::move(e);
      break;
    }
  }
  return l;
}

}  // namespace ile
