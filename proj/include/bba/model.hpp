#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "bba/ann.hpp"
#include "bba/common.hpp"
#include "bba/oracle.hpp"
#include "bba/scaling.hpp"
#include "bba/svm.hpp"

namespace bba {

enum class ModelKind { kLinearSvm, kRbfSvm, kAnn };

inline const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinearSvm:
      return "linear-svm";
    case ModelKind::kRbfSvm:
      return "rbf-svm";
    case ModelKind::kAnn:
      return "ann";
  }
  return "unknown";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "linear-svm") return ModelKind::kLinearSvm;
  if (s == "rbf-svm") return ModelKind::kRbfSvm;
  if (s == "ann") return ModelKind::kAnn;
  throw DataError("unknown model kind: " + s);
}

/// A trained classifier plus the feature scaling used to produce its input
/// space. Immutable after training; safe to share across threads.
struct ModelSpec {
  ModelKind kind = ModelKind::kLinearSvm;
  FeatureScaling scaling;
  std::variant<LinearSvm, RbfSvm, AnnModel> impl;

  int dim() const { return scaling.dim(); }
};

/// P(class 1) for a point already in the model input space.
inline double probability_class1(const ModelSpec& model,
                                 const FeatureVector& z) {
  switch (model.kind) {
    case ModelKind::kLinearSvm: {
      const auto& m = std::get<LinearSvm>(model.impl);
      return platt_probability(m.platt, m.score(z));
    }
    case ModelKind::kRbfSvm: {
      const auto& m = std::get<RbfSvm>(model.impl);
      return platt_probability(m.platt, m.score(z));
    }
    case ModelKind::kAnn:
      return std::get<AnnModel>(model.impl).probability(z);
  }
  throw std::logic_error("probability_class1: bad model kind");
}

/// Deterministic prediction. Probability exactly 0.5 resolves to class 1.
inline OracleResponse predict(const ModelSpec& model, const FeatureVector& z) {
  if (z.size() != model.dim()) {
    throw std::invalid_argument("predict: dimension mismatch");
  }
  const double p1 = probability_class1(model, z);
  OracleResponse r;
  r.label = p1 >= 0.5 ? 1 : 0;
  r.confidence = r.label == 1 ? p1 : 1.0 - p1;
  return r;
}

namespace detail {

// Reals are serialized as hex floats so load(save(m)) is bit-exact.
inline std::string real_to_text(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double real_from_text(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw DataError("model file: bad real value '" + s + "'");
  }
  return v;
}

inline void write_vector(std::ostream& os, const char* name,
                         const Eigen::VectorXd& v) {
  os << name;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << real_to_text(v[i]);
  os << '\n';
}

inline void write_matrix(std::ostream& os, const char* name, const Matrix& m) {
  os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << (j ? " " : "") << real_to_text(m(i, j));
    }
    os << '\n';
  }
}

class ModelReader {
 public:
  explicit ModelReader(std::istream& is) : is_(is) {}

  std::string key() {
    std::string k;
    if (!(is_ >> k)) throw DataError("model file: unexpected end of file");
    return k;
  }

  void expect(const std::string& want) {
    const std::string got = key();
    if (got != want) {
      throw DataError("model file: expected '" + want + "', found '" + got +
                      "'");
    }
  }

  std::string word() { return key(); }

  double real() {
    std::string s;
    if (!(is_ >> s)) throw DataError("model file: missing value");
    return real_from_text(s);
  }

  long integer() {
    long v = 0;
    if (!(is_ >> v)) throw DataError("model file: missing integer");
    return v;
  }

  Eigen::VectorXd vector(const char* name, Eigen::Index size) {
    expect(name);
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = real();
    return v;
  }

  Matrix matrix(const char* name) {
    expect(name);
    const long rows = integer();
    const long cols = integer();
    if (rows < 0 || cols < 0) throw DataError("model file: bad matrix shape");
    Matrix m(rows, cols);
    for (long i = 0; i < rows; ++i) {
      for (long j = 0; j < cols; ++j) m(i, j) = real();
    }
    return m;
  }

 private:
  std::istream& is_;
};

}  // namespace detail

inline void save_model(const ModelSpec& model, std::ostream& os) {
  os << "bba_model 1\n";
  os << "kind " << to_string(model.kind) << '\n';
  os << "dim " << model.dim() << '\n';
  os << "scaling "
     << (model.scaling.mode() == FeatureScaling::Mode::kMinMax ? "minmax"
                                                               : "identity")
     << '\n';
  detail::write_vector(os, "scaling_min", model.scaling.min());
  detail::write_vector(os, "scaling_span", model.scaling.span());
  switch (model.kind) {
    case ModelKind::kLinearSvm: {
      const auto& m = std::get<LinearSvm>(model.impl);
      detail::write_vector(os, "weights", m.weights);
      os << "bias " << detail::real_to_text(m.bias) << '\n';
      os << "platt " << detail::real_to_text(m.platt.a) << ' '
         << detail::real_to_text(m.platt.b) << '\n';
      break;
    }
    case ModelKind::kRbfSvm: {
      const auto& m = std::get<RbfSvm>(model.impl);
      os << "gamma " << detail::real_to_text(m.gamma) << '\n';
      os << "n_support " << m.support.rows() << '\n';
      detail::write_vector(os, "coeff", m.coeff);
      detail::write_matrix(os, "support", m.support);
      os << "platt " << detail::real_to_text(m.platt.a) << ' '
         << detail::real_to_text(m.platt.b) << '\n';
      break;
    }
    case ModelKind::kAnn: {
      const auto& m = std::get<AnnModel>(model.impl);
      detail::write_matrix(os, "w1", m.w1);
      detail::write_vector(os, "b1", m.b1);
      detail::write_vector(os, "w2", m.w2);
      os << "b2 " << detail::real_to_text(m.b2) << '\n';
      break;
    }
  }
}

inline void save_model(const ModelSpec& model, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open model file for writing: " + path);
  save_model(model, os);
  if (!os) throw DataError("failed writing model file: " + path);
}

inline ModelSpec load_model(std::istream& is) {
  detail::ModelReader r(is);
  r.expect("bba_model");
  const long version = r.integer();
  if (version != 1) {
    throw DataError("model file: unsupported version " +
                    std::to_string(version));
  }
  r.expect("kind");
  const ModelKind kind = model_kind_from_string(r.word());
  r.expect("dim");
  const long dim = r.integer();
  if (dim <= 0) throw DataError("model file: bad dimension");
  r.expect("scaling");
  const std::string mode = r.word();
  if (mode != "minmax" && mode != "identity") {
    throw DataError("model file: unknown scaling mode " + mode);
  }
  Eigen::VectorXd mn = r.vector("scaling_min", dim);
  Eigen::VectorXd span = r.vector("scaling_span", dim);

  ModelSpec model;
  model.kind = kind;
  model.scaling = FeatureScaling(mode == "minmax"
                                     ? FeatureScaling::Mode::kMinMax
                                     : FeatureScaling::Mode::kIdentity,
                                 std::move(mn), std::move(span));
  switch (kind) {
    case ModelKind::kLinearSvm: {
      LinearSvm m;
      m.weights = r.vector("weights", dim);
      r.expect("bias");
      m.bias = r.real();
      r.expect("platt");
      m.platt.a = r.real();
      m.platt.b = r.real();
      model.impl = std::move(m);
      break;
    }
    case ModelKind::kRbfSvm: {
      RbfSvm m;
      r.expect("gamma");
      m.gamma = r.real();
      r.expect("n_support");
      const long n_support = r.integer();
      if (n_support < 0) throw DataError("model file: bad support count");
      m.coeff = r.vector("coeff", n_support);
      m.support = r.matrix("support");
      if (m.support.rows() != n_support || m.support.cols() != dim) {
        throw DataError("model file: support matrix shape mismatch");
      }
      r.expect("platt");
      m.platt.a = r.real();
      m.platt.b = r.real();
      model.impl = std::move(m);
      break;
    }
    case ModelKind::kAnn: {
      AnnModel m;
      m.w1 = r.matrix("w1");
      const long hidden = m.w1.cols();
      m.b1 = r.vector("b1", hidden);
      m.w2 = r.vector("w2", hidden);
      r.expect("b2");
      m.b2 = r.real();
      model.impl = std::move(m);
      break;
    }
  }
  return model;
}

inline ModelSpec load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open model file: " + path);
  return load_model(is);
}

}  // namespace bba
