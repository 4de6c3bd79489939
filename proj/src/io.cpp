#include "cpdkit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cpdkit {

namespace {

std::string format_scalar(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void expect_magic(std::istream& in, const std::string& path, const std::string& magic) {
  std::string line;
  if (!std::getline(in, line) || line != magic)
    throw std::runtime_error(path + ": expected header '" + magic + "'");
}

long read_labeled(std::istream& in, const std::string& path, const std::string& label) {
  std::string word;
  long value = 0;
  if (!(in >> word >> value) || word != label)
    throw std::runtime_error(path + ": expected '" + label + " <count>' line");
  return value;
}

}  // namespace

void write_tensor(const std::string& path, const DenseTensor& t) {
  auto out = open_output(path);
  out << "TNSR 1\n";
  out << "order " << t.order() << "\n";
  out << "dims";
  for (Index d : t.shape()) out << ' ' << d;
  out << "\n";
  for (Index i = 0; i < t.size(); ++i) out << format_scalar(t[i]) << "\n";
  if (!out) throw std::runtime_error("short write to " + path);
}

DenseTensor read_tensor(const std::string& path) {
  auto in = open_input(path);
  expect_magic(in, path, "TNSR 1");
  const long order = read_labeled(in, path, "order");
  if (order < 1) throw std::runtime_error(path + ": invalid order");
  std::string word;
  if (!(in >> word) || word != "dims") throw std::runtime_error(path + ": expected dims line");
  std::vector<Index> shape(order);
  Index total = 1;
  for (long n = 0; n < order; ++n) {
    if (!(in >> shape[n]) || shape[n] < 1) throw std::runtime_error(path + ": bad mode length");
    total *= shape[n];
  }
  Vector data(total);
  for (Index i = 0; i < total; ++i)
    if (!(in >> data[i])) throw std::runtime_error(path + ": truncated data");
  return DenseTensor(std::move(shape), std::move(data));
}

void write_matrix(const std::string& path, const Matrix& m) {
  auto out = open_output(path);
  out << "FCTR 1\n";
  out << "rows " << m.rows() << "\n";
  out << "cols " << m.cols() << "\n";
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out << format_scalar(m(i, j)) << "\n";
  if (!out) throw std::runtime_error("short write to " + path);
}

Matrix read_matrix(const std::string& path) {
  auto in = open_input(path);
  expect_magic(in, path, "FCTR 1");
  const long rows = read_labeled(in, path, "rows");
  const long cols = read_labeled(in, path, "cols");
  if (rows < 1 || cols < 1) throw std::runtime_error(path + ": bad matrix shape");
  Matrix m(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i)
      if (!(in >> m(i, j))) throw std::runtime_error(path + ": truncated data");
  return m;
}

void write_lambda(const std::string& path, const Vector& lambda) {
  auto out = open_output(path);
  out << "LMBD 1\n";
  out << "rank " << lambda.size() << "\n";
  for (Index r = 0; r < lambda.size(); ++r) out << format_scalar(lambda[r]) << "\n";
  if (!out) throw std::runtime_error("short write to " + path);
}

Vector read_lambda(const std::string& path) {
  auto in = open_input(path);
  expect_magic(in, path, "LMBD 1");
  const long rank = read_labeled(in, path, "rank");
  if (rank < 1) throw std::runtime_error(path + ": bad rank");
  Vector lambda(rank);
  for (long r = 0; r < rank; ++r)
    if (!(in >> lambda[r])) throw std::runtime_error(path + ": truncated data");
  return lambda;
}

void write_model(const std::string& prefix, const KruskalModel& m) {
  for (Index n = 0; n < m.order(); ++n)
    write_matrix(prefix + ".A" + std::to_string(n + 1) + ".fctr", m.factors[n]);
  write_lambda(prefix + ".lambda.lmbd", m.lambda);
}

KruskalModel read_model(const std::string& prefix) {
  Vector lambda = read_lambda(prefix + ".lambda.lmbd");
  std::vector<Matrix> factors;
  for (Index n = 1;; ++n) {
    const std::string path = prefix + ".A" + std::to_string(n) + ".fctr";
    std::ifstream probe(path);
    if (!probe) break;
    probe.close();
    factors.push_back(read_matrix(path));
  }
  if (factors.empty()) throw std::runtime_error("no factor files found for prefix " + prefix);
  return KruskalModel(std::move(lambda), std::move(factors));
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace,
                     const std::vector<std::string>& header_comments) {
  auto out = open_output(path);
  for (const auto& c : header_comments) out << "# " << c << "\n";
  out << "sweep,mode,residual,fitness,cond,delta,threshold,seconds\n";
  for (const auto& r : trace) {
    out << r.sweep << ',' << r.mode << ',' << format_scalar(r.residual) << ','
        << format_scalar(r.fitness) << ',';
    if (std::isfinite(r.cond))
      out << format_scalar(r.cond);
    else if (std::isinf(r.cond))
      out << "inf";
    out << ',' << format_scalar(r.delta) << ',' << r.threshold << ','
        << format_scalar(r.seconds) << "\n";
  }
  if (!out) throw std::runtime_error("short write to " + path);
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  auto in = open_input(path);
  std::vector<TraceRecord> trace;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line.rfind("sweep,", 0) != 0)
        throw std::runtime_error(path + ": missing column header");
      saw_header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    TraceRecord r;
    auto next = [&]() {
      if (!std::getline(ss, field, ',')) throw std::runtime_error(path + ": short row");
      return field;
    };
    r.sweep = std::stol(next());
    r.mode = std::stol(next());
    r.residual = std::stod(next());
    r.fitness = std::stod(next());
    const std::string cond = next();
    if (cond.empty())
      r.cond = std::numeric_limits<double>::quiet_NaN();
    else if (cond == "inf")
      r.cond = std::numeric_limits<double>::infinity();
    else
      r.cond = std::stod(cond);
    r.delta = std::stod(next());
    r.threshold = std::stol(next());
    r.seconds = std::stod(next());
    trace.push_back(r);
  }
  if (!saw_header) throw std::runtime_error(path + ": not a trace csv");
  return trace;
}

}  // namespace cpdkit
