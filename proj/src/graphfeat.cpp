#include "cortigraph/graphfeat.hpp"

#include "cortigraph/error.hpp"

#include <cmath>
#include <exception>
#include <queue>

namespace cortigraph::graphfeat {

Graph::Graph(const Eigen::MatrixXi& adj, std::vector<std::string> names) : adj_(adj), names_(std::move(names)) {
  if (adj.rows() != adj.cols()) fail(Errc::SizeMismatch, "adjacency must be square");
  const auto n = static_cast<std::size_t>(adj.rows());
  if (!names_.empty() && names_.size() != n) fail(Errc::SizeMismatch, "node name count differs from node count");
  neighbours_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const int a = adj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (a != 0 && a != 1) fail(Errc::InvalidRange, "adjacency entries must be 0 or 1");
      if (a != adj(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) fail(Errc::InvalidRange, "adjacency must be symmetric");
      if (i == j && a != 0) fail(Errc::InvalidRange, "adjacency diagonal must be zero");
      if (a) neighbours_[i].push_back(j);
    }
  }
}

std::size_t Graph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& nb : neighbours_) twice += nb.size();
  return twice / 2;
}

bool Graph::connected_ignoring_isolated() const {
  std::size_t start = n();
  std::size_t non_isolated = 0;
  for (std::size_t u = 0; u < n(); ++u) {
    if (degree(u) > 0) {
      ++non_isolated;
      if (start == n()) start = u;
    }
  }
  if (non_isolated == 0) return true;
  std::vector<bool> seen(n(), false);
  std::queue<std::size_t> q;
  q.push(start);
  seen[start] = true;
  std::size_t reached = 1;
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (auto w : neighbours_[u]) {
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        q.push(w);
      }
    }
  }
  return reached == non_isolated;
}

Eigen::VectorXd degree_centrality(const Graph& g) {
  const auto n = g.n();
  if (n < 2) fail(Errc::TooFewNodes, "degree centrality needs at least 2 nodes");
  Eigen::VectorXd d(static_cast<Eigen::Index>(n));
  for (std::size_t u = 0; u < n; ++u) d(static_cast<Eigen::Index>(u)) = static_cast<double>(g.degree(u)) / static_cast<double>(n - 1);
  return d;
}

Eigen::VectorXd betweenness_centrality(const Graph& g) {
  const auto n = g.n();
  if (n < 3) fail(Errc::TooFewNodes, "betweenness centrality needs at least 3 nodes");
  Eigen::VectorXd bc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  // Brandes: BFS shortest-path counting, then dependency accumulation in
  // reverse BFS order.
  std::vector<double> sigma(n), delta(n);
  std::vector<long long> dist(n);
  std::vector<std::vector<std::size_t>> pred(n);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    for (auto& p : pred) p.clear();
    order.clear();

    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<std::size_t> q;
    q.push(s);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      order.push_back(v);
      for (auto w : g.neighbours(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = *it;
      for (auto v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc(static_cast<Eigen::Index>(w)) += delta[w];
    }
  }
  // Each unordered pair was counted from both endpoints.
  bc /= 2.0;
  bc *= 2.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
  return bc;
}

EigenvectorResult eigenvector_centrality(const Graph& g, double tol, std::size_t max_iter) {
  const auto n = g.n();
  if (g.edge_count() == 0) fail(Errc::NoEdges, "eigenvector centrality is undefined without edges");

  // Iterating with A + I keeps the eigenvectors of A but removes the
  // oscillation of bipartite graphs (eigenvalues +lambda and -lambda).
  EigenvectorResult res;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  Eigen::VectorXd next(x.size());
  for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
    for (std::size_t u = 0; u < n; ++u) {
      double s = x(static_cast<Eigen::Index>(u));
      for (auto w : g.neighbours(u)) s += x(static_cast<Eigen::Index>(w));
      next(static_cast<Eigen::Index>(u)) = s;
    }
    next.normalize();
    const double change = (next - x).cwiseAbs().maxCoeff();
    x.swap(next);
    if (change < tol) {
      res.converged = true;
      break;
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (g.degree(u) == 0) x(static_cast<Eigen::Index>(u)) = 0.0;
  }
  x = x.cwiseMax(0.0);
  x.normalize();
  res.values = x;
  res.disconnected = !g.connected_ignoring_isolated();
  return res;
}

Eigen::VectorXd closeness_centrality(const Graph& g) {
  const auto n = g.n();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (n < 2) return c;
  std::vector<long long> dist(n);
  for (std::size_t u = 0; u < n; ++u) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[u] = 0;
    std::queue<std::size_t> q;
    q.push(u);
    long long total = 0;
    std::size_t reached = 1;
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      for (auto w : g.neighbours(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          total += dist[w];
          ++reached;
          q.push(w);
        }
      }
    }
    if (reached > 1) {
      const double r = static_cast<double>(reached - 1);
      c(static_cast<Eigen::Index>(u)) = (r / static_cast<double>(total)) * (r / static_cast<double>(n - 1));
    }
  }
  return c;
}

Eigen::VectorXd clustering_coefficient(const Graph& g) {
  const auto n = g.n();
  const auto& a = g.adjacency();
  Eigen::VectorXd k = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t u = 0; u < n; ++u) {
    const auto& nb = g.neighbours(u);
    const auto d = nb.size();
    if (d < 2) continue;
    std::size_t triangles = 0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) triangles += static_cast<std::size_t>(a(static_cast<Eigen::Index>(nb[i]), static_cast<Eigen::Index>(nb[j])));
    }
    k(static_cast<Eigen::Index>(u)) = 2.0 * static_cast<double>(triangles) / (static_cast<double>(d) * static_cast<double>(d - 1));
  }
  return k;
}

FeatureVector assemble_features(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  FeatureVector fv;
  fv.values.resize(static_cast<Eigen::Index>(kFeatureKinds) * n);
  fv.values.segment(0, n) = degree_centrality(g);
  fv.values.segment(n, n) = betweenness_centrality(g);
  try {
    const auto ev = eigenvector_centrality(g);
    fv.values.segment(2 * n, n) = ev.values;
    if (ev.disconnected) fv.warnings.push_back("DisconnectedAmbiguity: eigenvector centrality on a disconnected graph");
    if (!ev.converged) fv.warnings.push_back("eigenvector centrality did not converge");
  } catch (const Error& e) {
    if (e.code() != Errc::NoEdges) throw;
    fv.values.segment(2 * n, n).setZero();
    fv.warnings.push_back("NoEdges: eigenvector centrality set to zero");
  }
  fv.values.segment(3 * n, n) = closeness_centrality(g);
  fv.values.segment(4 * n, n) = clustering_coefficient(g);
  return fv;
}

std::vector<FeatureVector> assemble_batch(const std::vector<Eigen::MatrixXi>& graphs, Exec exec) {
  std::vector<FeatureVector> out(graphs.size());
  const auto n = static_cast<long long>(graphs.size());
  // Errors are captured per item and rethrown outside the parallel region.
  std::vector<std::exception_ptr> errors(graphs.size());
  auto work = [&](long long i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = assemble_features(Graph(graphs[k]));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) work(i);
  } else {
    for (long long i = 0; i < n; ++i) work(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<std::string> feature_labels(const std::vector<std::string>& node_names) {
  std::vector<std::string> labels;
  for (const auto* kind : kFeatureNames) {
    for (const auto& name : node_names) labels.push_back(std::string(kind) + ":" + name);
  }
  return labels;
}

}  // namespace cortigraph::graphfeat
