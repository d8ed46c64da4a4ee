#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "glime/errors.hpp"
#include "glime/tabular.hpp"

namespace glime {

// A scorer mapping a feature row to a probability in [0, 1]. Scoring is
// batch-invariant: each row's score depends on that row alone, so splitting
// or reordering a batch never changes any individual result.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Eigen::Index n_features() const = 0;
  virtual Eigen::VectorXd score_batch(const Eigen::MatrixXd& rows) = 0;

  double score_one(const Eigen::VectorXd& row) {
    Eigen::MatrixXd one(1, row.size());
    one.row(0) = row.transpose();
    return score_batch(one)(0);
  }
};

// ---------------------------------------------------------------------------
// Built-in classifier: RBF-kernel logistic regression

struct KernelClassifierConfig {
  // <= 0 selects 0.1/p on standardized features. The kernel length scale is
  // then sqrt(10 p) standard deviations, several times wider than the
  // perturbation neighborhoods the explainer samples, which keeps local
  // scores varying with the class signal instead of with plain distance
  // from the training support.
  double gamma_rbf = 0.0;
  double l2_penalty = 1e-3;  // ridge on the kernel expansion coefficients
  int max_iterations = 2000;
  double tolerance = 1e-6;   // sup-norm of the preconditioned gradient
};

// Logistic regression in the RKHS of an RBF kernel over standardized
// features, fit by preconditioned (function-space) gradient descent from a
// zero start. Everything about training and scoring is deterministic.
class KernelClassifier final : public Predictor {
 public:
  static KernelClassifier train(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                                const KernelClassifierConfig& cfg = {}) {
    require(X.rows() == y.size(), errc::length_mismatch,
            "feature rows and targets differ in length");
    require(X.rows() >= 10, errc::too_few_rows, "need at least 10 training rows");
    require(cfg.l2_penalty > 0.0, errc::config_error, "l2 penalty must be positive");
    require(cfg.max_iterations > 0, errc::config_error, "max iterations must be positive");
    require(cfg.tolerance > 0.0, errc::config_error, "tolerance must be positive");
    const Eigen::Index n = X.rows(), p = X.cols();
    const int pos = (y.array() == 1).count();
    require(pos > 0 && pos < n, errc::single_class,
            "training data contains a single class");

    KernelClassifier clf;
    clf.means_ = X.colwise().mean();
    clf.stds_ = Eigen::VectorXd(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double var = (X.col(j).array() - clf.means_(j)).square().mean();
      clf.stds_(j) = std::sqrt(var);
    }
    clf.gamma_ = cfg.gamma_rbf > 0.0 ? cfg.gamma_rbf : 0.1 / static_cast<double>(p);

    clf.Z_ = Eigen::MatrixXd(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      if (clf.stds_(j) > 0.0)
        clf.Z_.col(j) = (X.col(j).array() - clf.means_(j)) / clf.stds_(j);
      else
        clf.Z_.col(j).setZero();
    }

    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      K(i, i) = 1.0;
      for (Eigen::Index k = i + 1; k < n; ++k) {
        const double v = std::exp(-clf.gamma_ * (clf.Z_.row(i) - clf.Z_.row(k)).squaredNorm());
        K(i, k) = v;
        K(k, i) = v;
      }
    }

    const double base = static_cast<double>(pos) / static_cast<double>(n);
    clf.bias_ = std::log(base / (1.0 - base));
    clf.alpha_ = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd yd = y.cast<double>();
    // The preconditioned update contracts for any step below 2/(1/4 + l2);
    // 3/4 of that bound keeps a comfortable margin.
    const double step = 1.5 / (0.25 + cfg.l2_penalty);

    for (clf.iterations_ = 0; clf.iterations_ < cfg.max_iterations; ++clf.iterations_) {
      const Eigen::VectorXd f = K * clf.alpha_ + Eigen::VectorXd::Constant(n, clf.bias_);
      const Eigen::VectorXd g =
          ((1.0 / (1.0 + (-f.array()).exp())) - yd.array()).matrix() / static_cast<double>(n) +
          cfg.l2_penalty * clf.alpha_;
      if (g.lpNorm<Eigen::Infinity>() <= cfg.tolerance) {
        clf.converged_ = true;
        break;
      }
      clf.alpha_ -= step * g;
    }
    clf.Zt_ = clf.Z_.transpose();  // contiguous columns for the scoring loop
    return clf;
  }

  static KernelClassifier train(const TabularDataset& d, const KernelClassifierConfig& cfg = {}) {
    require(d.target.has_value(), errc::config_error, "training data has no target column");
    return train(d.rows, *d.target, cfg);
  }

  Eigen::Index n_features() const override { return means_.size(); }
  bool converged() const { return converged_; }
  int iterations() const { return iterations_; }

  Eigen::VectorXd score_batch(const Eigen::MatrixXd& rows) override {
    require(rows.cols() == means_.size(), errc::width_mismatch,
            "row width does not match training width");
    Eigen::VectorXd out(rows.rows());
    Eigen::VectorXd z(means_.size());
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      for (Eigen::Index j = 0; j < means_.size(); ++j)
        z(j) = stds_(j) > 0.0 ? (rows(r, j) - means_(j)) / stds_(j) : 0.0;
      double f = bias_;
      for (Eigen::Index i = 0; i < Zt_.cols(); ++i)
        f += alpha_(i) * std::exp(-gamma_ * (Zt_.col(i) - z).squaredNorm());
      out(r) = 1.0 / (1.0 + std::exp(-f));
    }
    return out;
  }

 private:
  Eigen::MatrixXd Z_;      // standardized training rows
  Eigen::MatrixXd Zt_;     // the same rows as contiguous columns
  Eigen::VectorXd alpha_;
  Eigen::VectorXd means_, stds_;
  double bias_ = 0.0, gamma_ = 1.0;
  bool converged_ = false;
  int iterations_ = 0;
};

// ---------------------------------------------------------------------------
// External predictor: a child process speaking a line protocol on its
// standard streams.
//
//   parent:  HELLO glime-predictor 1        child:  READY <p>
//   parent:  SCORE <m>
//            <m rows, p comma-separated decimals each>
//                                           child:  <m score lines>
//   parent:  BYE                            child exits 0

struct ExternalPredictorConfig {
  int handshake_timeout_ms = 5000;
  int io_timeout_ms = 10000;
};

class ExternalPredictor final : public Predictor {
 public:
  explicit ExternalPredictor(std::vector<std::string> argv,
                             const ExternalPredictorConfig& cfg = {})
      : cfg_(cfg) {
    require(!argv.empty(), errc::config_error, "external predictor command is empty");
    spawn(argv);
    try {
      write_all("HELLO glime-predictor 1\n");
      const std::string line = read_line(cfg_.handshake_timeout_ms, errc::handshake_timeout);
      long p = 0;
      if (std::sscanf(line.c_str(), "READY %ld", &p) != 1 || p <= 0)
        fail(errc::malformed_response, "handshake reply was '" + line + "'");
      p_ = static_cast<Eigen::Index>(p);
    } catch (...) {
      shutdown(true);
      throw;
    }
  }

  ~ExternalPredictor() override { shutdown(false); }

  ExternalPredictor(const ExternalPredictor&) = delete;
  ExternalPredictor& operator=(const ExternalPredictor&) = delete;

  Eigen::Index n_features() const override { return p_; }

  Eigen::VectorXd score_batch(const Eigen::MatrixXd& rows) override {
    std::lock_guard<std::mutex> lock(mutex_);  // one batch in flight at a time
    require(rows.cols() == p_, errc::width_mismatch,
            "row width does not match the advertised feature count");
    require(child_ > 0, errc::external_protocol, "predictor process is gone");

    std::string request = "SCORE " + std::to_string(rows.rows()) + "\n";
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        if (j) request += ',';
        request += detail::format_double(rows(r, j));
      }
      request += '\n';
    }
    write_all(request);

    Eigen::VectorXd scores(rows.rows());
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      const std::string line = read_line(cfg_.io_timeout_ms, errc::external_protocol);
      double v = 0.0;
      if (!detail::parse_double(line, v) || !(v >= 0.0 && v <= 1.0))
        fail(errc::malformed_response, "score reply was '" + line + "'");
      scores(r) = v;
    }
    return scores;
  }

 private:
  void spawn(const std::vector<std::string>& argv) {
    int to_child[2], from_child[2], errpipe[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0 || ::pipe(errpipe) != 0)
      fail(errc::spawn_failure, std::strerror(errno));
    ::fcntl(errpipe[1], F_SETFD, FD_CLOEXEC);

    child_ = ::fork();
    if (child_ < 0) fail(errc::spawn_failure, std::strerror(errno));
    if (child_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::close(errpipe[0]);
      std::vector<char*> cargv;
      for (const std::string& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
      cargv.push_back(nullptr);
      ::execvp(cargv[0], cargv.data());
      const int err = errno;
      (void)!::write(errpipe[1], &err, sizeof err);
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::close(errpipe[1]);
    in_ = from_child[0];
    out_ = to_child[1];

    int err = 0;
    if (::read(errpipe[0], &err, sizeof err) == sizeof err) {
      ::close(errpipe[0]);
      shutdown(true);
      fail(errc::spawn_failure, argv[0] + ": " + std::strerror(err));
    }
    ::close(errpipe[0]);
  }

  void write_all(const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(out_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail(errc::external_protocol, std::string("write: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(int timeout_ms, errc timeout_code) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (true) {
      const std::size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
      if (left <= 0) fail(timeout_code, "timed out waiting for the predictor");
      struct pollfd pfd {in_, POLLIN, 0};
      const int pr = ::poll(&pfd, 1, static_cast<int>(left));
      if (pr < 0) {
        if (errno == EINTR) continue;
        fail(errc::external_protocol, std::string("poll: ") + std::strerror(errno));
      }
      if (pr == 0) fail(timeout_code, "timed out waiting for the predictor");
      char chunk[4096];
      const ssize_t n = ::read(in_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail(errc::external_protocol, std::string("read: ") + std::strerror(errno));
      }
      if (n == 0)
        fail(errc::external_protocol, "predictor closed its output mid-conversation");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void shutdown(bool force) noexcept {
    if (out_ >= 0) {
      if (!force) {
        const char bye[] = "BYE\n";
        (void)!::write(out_, bye, sizeof bye - 1);
      }
      ::close(out_);
      out_ = -1;
    }
    if (in_ >= 0) {
      ::close(in_);
      in_ = -1;
    }
    if (child_ > 0) {
      int status = 0;
      for (int i = 0; i < 20; ++i) {
        if (::waitpid(child_, &status, WNOHANG) == child_) {
          child_ = -1;
          return;
        }
        ::usleep(50 * 1000);
      }
      ::kill(child_, SIGKILL);
      ::waitpid(child_, &status, 0);
      child_ = -1;
    }
  }

  ExternalPredictorConfig cfg_;
  std::mutex mutex_;
  std::string buffer_;
  Eigen::Index p_ = 0;
  pid_t child_ = -1;
  int in_ = -1, out_ = -1;
};

}  // namespace glime
