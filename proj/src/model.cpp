#include "qgnn/model.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qgnn/rng.hpp"

namespace qgnn {

void Matrix::apply(std::span<const Real> x, std::span<Real> y) const {
  for (std::size_t r = 0; r < rows; ++r) {
    Real acc = 0;
    const Real* w = a.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += w[c] * x[c];
    y[r] = acc;
  }
}

void ModelSpec::validate() const {
  if (layers < 1) throw ShapeError("model needs at least one layer");
  if (dims.size() != layers + 1) {
    throw ShapeError("dims must list layers + 1 sizes, got " + std::to_string(dims.size()));
  }
  for (std::size_t d : dims) {
    if (d == 0) throw ShapeError("zero layer size");
  }
  if (cls == ModelClass::kGin) {
    if (mlp.size() != layers) throw ShapeError("gin needs one weight pair per layer");
    for (std::size_t k = 0; k < layers; ++k) {
      const auto& [w1, w2] = mlp[k];
      if (w1.cols != dims[k] || w2.rows != dims[k + 1] || w1.rows != w2.cols) {
        throw ShapeError("gin layer " + std::to_string(k + 1) + " has mismatched dims");
      }
    }
  } else {
    if (weights.size() != layers) throw ShapeError("need one matrix per layer");
    for (std::size_t k = 0; k < layers; ++k) {
      const std::size_t in = cls == ModelClass::kSage ? 2 * dims[k] : dims[k];
      if (weights[k].rows != dims[k + 1] || weights[k].cols != in) {
        throw ShapeError("layer " + std::to_string(k + 1) + " matrix is " +
                         std::to_string(weights[k].rows) + "x" + std::to_string(weights[k].cols) +
                         ", expected " + std::to_string(dims[k + 1]) + "x" + std::to_string(in));
      }
    }
  }
}

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng) {
  Matrix m(rows, cols);
  for (Real& x : m.a) x = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

ModelSpec generate_model(ModelClass cls, std::size_t layers, std::span<const std::size_t> dims,
                         std::uint64_t seed, Aggregator agg, double gin_gamma) {
  ModelSpec m;
  m.cls = cls;
  m.layers = layers;
  m.dims.assign(dims.begin(), dims.end());
  m.aggregator = agg;
  m.gin_gamma = gin_gamma;
  m.seed = seed;
  SplitMix64 rng(seed);
  for (std::size_t k = 0; k < layers; ++k) {
    if (cls == ModelClass::kGin) {
      Matrix w1 = random_matrix(dims[k + 1], dims[k], rng);
      Matrix w2 = random_matrix(dims[k + 1], dims[k + 1], rng);
      m.mlp.emplace_back(std::move(w1), std::move(w2));
    } else {
      const std::size_t in = cls == ModelClass::kSage ? 2 * dims[k] : dims[k];
      m.weights.push_back(random_matrix(dims[k + 1], in, rng));
    }
  }
  m.validate();
  return m;
}

namespace {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kLeakyRelu: return "leaky_relu";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

Activation activation_from_name(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "leaky_relu") return Activation::kLeakyRelu;
  if (s == "identity") return Activation::kIdentity;
  throw ParseError("unknown activation: " + s);
}

void write_matrix(std::ofstream& out, const std::string& tag, const Matrix& m) {
  out << tag << ' ' << m.rows << ' ' << m.cols << '\n';
  char buf[64];
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m.at(r, c));
      if (c) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

Matrix read_matrix(std::ifstream& in, const std::string& expect_tag) {
  std::string tag;
  std::size_t rows = 0, cols = 0;
  if (!(in >> tag >> rows >> cols) || tag != expect_tag) {
    throw ParseError("model file: expected matrix tag " + expect_tag);
  }
  Matrix m(rows, cols);
  for (Real& x : m.a) {
    if (!(in >> x)) throw ParseError("model file: truncated matrix " + expect_tag);
  }
  return m;
}

}  // namespace

void save_model(const ModelSpec& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "class " << model_class_name(m.cls) << '\n';
  out << "layers " << m.layers << '\n';
  out << "dims";
  for (std::size_t d : m.dims) out << ' ' << d;
  out << '\n';
  out << "hidden_activation " << activation_name(m.hidden_activation) << '\n';
  out << "output_activation " << activation_name(m.output_activation) << '\n';
  out << "leaky_slope " << m.leaky_slope << '\n';
  out << "aggregator " << (m.aggregator == Aggregator::kSum ? "sum" : "avg") << '\n';
  out << "gamma " << m.gin_gamma << '\n';
  out << "seed " << m.seed << '\n';
  for (std::size_t k = 0; k < m.layers; ++k) {
    if (m.cls == ModelClass::kGin) {
      write_matrix(out, "mlp1." + std::to_string(k + 1), m.mlp[k].first);
      write_matrix(out, "mlp2." + std::to_string(k + 1), m.mlp[k].second);
    } else {
      write_matrix(out, "theta." + std::to_string(k + 1), m.weights[k]);
    }
  }
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  ModelSpec m;
  std::string key;
  std::string s;
  auto expect = [&](const char* want) {
    if (!(in >> key) || key != want) throw ParseError(path + ": expected '" + want + "'");
  };
  expect("class");
  in >> s;
  m.cls = model_class_from_name(s);
  expect("layers");
  in >> m.layers;
  expect("dims");
  m.dims.resize(m.layers + 1);
  for (auto& d : m.dims) {
    if (!(in >> d)) throw ParseError(path + ": truncated dims");
  }
  expect("hidden_activation");
  in >> s;
  m.hidden_activation = activation_from_name(s);
  expect("output_activation");
  in >> s;
  m.output_activation = activation_from_name(s);
  expect("leaky_slope");
  in >> m.leaky_slope;
  expect("aggregator");
  in >> s;
  m.aggregator = s == "avg" ? Aggregator::kAvg : Aggregator::kSum;
  expect("gamma");
  in >> m.gin_gamma;
  expect("seed");
  in >> m.seed;
  for (std::size_t k = 0; k < m.layers; ++k) {
    if (m.cls == ModelClass::kGin) {
      Matrix w1 = read_matrix(in, "mlp1." + std::to_string(k + 1));
      Matrix w2 = read_matrix(in, "mlp2." + std::to_string(k + 1));
      m.mlp.emplace_back(std::move(w1), std::move(w2));
    } else {
      m.weights.push_back(read_matrix(in, "theta." + std::to_string(k + 1)));
    }
  }
  m.validate();
  return m;
}

}  // namespace qgnn
