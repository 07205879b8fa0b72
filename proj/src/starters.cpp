#include "selfsim/starters.hpp"

#include <cmath>

#include "selfsim/integrate.hpp"

namespace selfsim {

const char* local_form_name(LocalForm f) {
    switch (f) {
        case LocalForm::Case1: return "case1";
        case LocalForm::Case2: return "case2";
        case LocalForm::Interface: return "interface";
        case LocalForm::Tail: return "tail";
        case LocalForm::PositiveA: return "positive-a";
        case LocalForm::SignChange: return "sign-change";
    }
    return "?";
}

namespace {

void check_delta(double delta) {
    if (!(delta > 0.0) || delta > 1e-3)
        throw BadDelta("starter offset must lie in (0, 1e-3]");
}

std::array<double, 3> unit(const std::array<double, 3>& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {v[0] / n, v[1] / n, v[2] / n};
}

}  // namespace

Starter make_starter(const Params& prm, PointId id, std::optional<double> family_param,
                     double delta) {
    const double m = prm.m;
    Starter st;
    st.delta = delta;
    st.family_param = family_param;

    switch (id) {
        case PointId::P2: {
            check_delta(delta);
            st.origin = classify_point(prm, PointId::P2);
            const P2Eigenvector ev = p2_eigenvector(prm);
            const std::array<double, 3> d = unit({ev.x, ev.y, ev.z});
            // d already points into {Z > 0}; the wanted orbit leaves that way.
            st.state.chart = Chart::Upper;
            for (int i = 0; i < 3; ++i) st.state.c[i] = st.origin.coords[i] + delta * d[i];
            // Z = xi^sigma f^{p-1} with f at its leading origin form inverts to xi.
            const double zs = delta * d[2];
            st.state.logxi = ((m - 1.0) * std::log(zs) - (prm.p - 1.0) * std::log(prm.x_p2())) /
                             (prm.sigma * (m - 1.0) + 2.0 * (prm.p - 1.0));
            st.expected_form = LocalForm::Case1;
            break;
        }
        case PointId::P0: {
            check_delta(delta);
            if (!family_param || !(*family_param > 0.0))
                throw BadFamilyParam("P0 starter needs a family parameter k > 0");
            const double k = *family_param;
            st.origin = classify_point(prm, PointId::P0);
            const double X = delta;
            const double Z = k * delta;
            // Quadratic center-manifold correction h(X, Z) keeps the starter on
            // the surface carrying the k-family.
            const double al = prm.alpha, be = prm.beta;
            const double h = -(m * al * (al + be + 1.0) / (be * be)) * X * X - X * Z;
            st.state.chart = Chart::Upper;
            st.state.c = {X, (al * X + h) / be, Z};
            st.state.logxi =
                be * (std::log(delta) + (m - 1.0) / (m - prm.p) * std::log(k));
            st.expected_form = LocalForm::Case2;
            break;
        }
        case PointId::InterfaceLine: {
            check_delta(delta);
            if (!family_param || !(*family_param > 0.0))
                throw BadFamilyParam("interface starter needs eta > 0");
            const double eta = *family_param;
            st.origin = classify_point(prm, PointId::InterfaceLine, eta);
            // The connection from {x > 0} enters along the stable eigendirection
            // (eigenvalue -(m-1) beta eta); pick the representative with x > 0.
            int idx = 0;
            double best = st.origin.eigenvalues[0].real();
            for (int i = 1; i < 3; ++i)
                if (st.origin.eigenvalues[i].real() < best) {
                    best = st.origin.eigenvalues[i].real();
                    idx = i;
                }
            std::array<double, 3> v{st.origin.eigenvectors[0][idx],
                                    st.origin.eigenvectors[1][idx],
                                    st.origin.eigenvectors[2][idx]};
            if (v[0] < 0.0) v = {-v[0], -v[1], -v[2]};
            v = unit(v);
            st.state.chart = Chart::Lower;
            for (int i = 0; i < 3; ++i) st.state.c[i] = st.origin.coords[i] + delta * v[i];
            st.state.logxi = std::log(st.state.c[2]);
            st.expected_form = LocalForm::Interface;
            break;
        }
        case PointId::Pgamma: {
            // Tail reference state; not intended as an integration seed.
            st.origin = classify_point(prm, PointId::Pgamma, family_param);
            st.state.chart = Chart::Upper;
            st.state.c = st.origin.coords;
            st.state.logxi = std::numeric_limits<double>::infinity();
            st.expected_form = LocalForm::Tail;
            st.validity_lo = 10.0;
            st.validity_hi = std::numeric_limits<double>::infinity();
            return st;
        }
        default:
            throw UnsupportedPoint(std::string("no starter recipe for ") + point_name(id));
    }

    const double xi_s = st.state.xi();
    st.validity_lo = 0.5 * xi_s;
    st.validity_hi = 2.0 * xi_s;
    return st;
}

ProfileSample local_profile(const Params& prm, const Starter& st, double xi,
                            bool extrapolate) {
    if (!extrapolate && (xi < st.validity_lo || xi > st.validity_hi))
        throw OutOfValidity("xi outside the starter's validity window");
    const double m = prm.m;
    ProfileSample out;
    out.xi = xi;

    switch (st.expected_form) {
        case LocalForm::Case1: {
            const double c1 = std::pow(prm.case1_coeff(), 1.0 / (m - 1.0));
            const double e1 = prm.case1_exponent();
            const double e2 = prm.case2_exponent();
            const double psi = p2_eigenvector(prm).psi;
            out.f = c1 * std::pow(xi, e1) - psi * std::pow(xi, e2);
            out.df = c1 * e1 * std::pow(xi, e1 - 1.0) - psi * e2 * std::pow(xi, e2 - 1.0);
            break;
        }
        case LocalForm::Case2: {
            const double k = st.family_param.value();
            const double coeff = std::pow(k, -1.0 / (m - prm.p));
            const double e = prm.case2_exponent();
            out.f = coeff * std::pow(xi, e);
            out.df = e * out.f / xi;
            break;
        }
        case LocalForm::Interface: {
            const double eta = st.family_param.value();
            const double c = prm.beta * (m - 1.0) / (2.0 * m);
            const double g = c * (eta * eta - xi * xi);
            if (g <= 0.0) return out;  // beyond the interface
            const double q = 1.0 / (m - 1.0);
            out.f = std::pow(g, q);
            out.df = -2.0 * c * xi * q * std::pow(g, q - 1.0);
            out.fm_prime = -prm.beta * xi * out.f;  // m f^{m-1} f' collapses to this here
            return out;
        }
        case LocalForm::Tail: {
            const double g0 = prm.gamma0();
            const double coeff = std::pow(g0, g0);  // (1/(p-1))^{1/(p-1)}
            const double e = -prm.sigma * g0;
            out.f = coeff * std::pow(xi, e);
            out.df = e * out.f / xi;
            break;
        }
        case LocalForm::PositiveA: {
            const double a = st.aux;
            const double g = std::pow(a, m - 1.0) + prm.grow_bound() * xi * xi;
            const double q = 1.0 / (m - 1.0);
            out.f = std::pow(g, q);
            out.df = 2.0 * prm.grow_bound() * xi * q * std::pow(g, q - 1.0);
            break;
        }
        case LocalForm::SignChange: {
            const double theta = st.family_param.value();
            const double c = st.aux != 0.0 ? st.aux : 1.0;
            const double e = 2.0 * m / (m - 1.0);
            const double g = c * (std::pow(xi, e) - std::pow(theta, e));
            if (g <= 0.0) return out;
            out.f = std::pow(g, 1.0 / m);
            out.df = (c * e * std::pow(xi, e - 1.0) / m) * std::pow(g, 1.0 / m - 1.0);
            break;
        }
    }
    out.fm_prime = m * std::pow(out.f, m - 1.0) * out.df;
    return out;
}

double starter_consistency_defect(const Params& prm, const Starter& st) {
    if (st.expected_form == LocalForm::Tail) return 0.0;
    // Flow the half-offset starter out to the level surface the full starter
    // sits on; the residual there is the truncation error of the local form,
    // free of the along-flow separation a fixed-arc comparison would pick up.
    const Starter half = make_starter(prm, st.origin.id, st.family_param, st.delta / 2.0);
    const Direction dir =
        st.expected_form == LocalForm::Interface ? Direction::Reverse : Direction::Forward;
    IntegrationConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-15;
    cfg.record_dense = false;
    EventSetup setup;
    setup.detect_divergence = false;
    if (st.origin.id == PointId::P0) {
        const double level = st.state.c[0];
        setup.stop_when = [level](double, const PhaseState& s) { return s.c[0] - level; };
    } else if (st.origin.id == PointId::InterfaceLine) {
        const double level = st.state.c[0];
        setup.stop_when = [level](double, const PhaseState& s) { return s.c[0] - level; };
    } else {
        const std::array<double, 3> ctr = st.origin.coords;
        const double level = st.delta;
        setup.stop_when = [ctr, level](double, const PhaseState& s) {
            double d2 = 0.0;
            for (int i = 0; i < 3; ++i) d2 += (s.c[i] - ctr[i]) * (s.c[i] - ctr[i]);
            return std::sqrt(d2) - level;
        };
    }
    const OrbitTrace tr = integrate(prm, half.state, dir, cfg, setup);
    if (tr.terminal.kind != EventKind::EnterBall)
        throw BracketError("half-offset starter never reached the comparison level");
    double d = 0.0;
    for (int i = 0; i < 3; ++i)
        d = std::max(d, std::abs(tr.terminal.state.c[i] - st.state.c[i]));
    return d;
}

}  // namespace selfsim
