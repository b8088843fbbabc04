//! Named graph families used by the bundled scenarios, the demo and tests.

use super::GraphSubmanifold;
use crate::error::Result;

/// `f = 0` in the standard layout.
pub fn zero(n: usize, k: usize) -> Result<GraphSubmanifold> {
    let zeros = vec!["0"; 2 * n - k + 1];
    GraphSubmanifold::standard_from_strs(n, k, &zeros)
}

/// `z = (xn^2 + yn^2) / 2`, all `y_a = 0`.
pub fn quadratic(n: usize) -> Result<GraphSubmanifold> {
    let mut comps = vec!["0".to_string(); n - 1];
    comps.push(format!("(x{n}^2 + y{n}^2)/2"));
    from_strings(n, n + 1, &comps)
}

/// `y_a = dh/dx_a`, `z = h(x1..x_{n-1}) + g(xn, yn)`.
pub fn product(n: usize, h: &str, g: &str) -> Result<GraphSubmanifold> {
    let chart = GraphSubmanifold::standard_chart(n, n + 1)?;
    let h = chart.parse_expr(h)?;
    let g = chart.parse_expr(g)?;
    let mut comps: Vec<_> = (0..n - 1).map(|a| h.expr.diff(a)).collect();
    comps.push(h.expr.add(&g.expr));
    GraphSubmanifold::standard(n, n + 1, comps)
}

/// The union over `s` of the Legendrian 1-jet graphs of
/// `F(x, s) = s*xn + s*H(x') + K(x') + xn^2 G(x') / 2`, with `s = yn - xn G`.
pub fn legendrian_union(
    n: usize,
    big_h: &str,
    big_k: &str,
    big_g: &str,
) -> Result<GraphSubmanifold> {
    let chart = GraphSubmanifold::standard_chart(n, n + 1)?;
    let (h, k, g) = (
        chart.parse_expr(big_h)?.expr,
        chart.parse_expr(big_k)?.expr,
        chart.parse_expr(big_g)?.expr,
    );
    let xn = crate::fields::Expr::var(n - 1);
    let yn = crate::fields::Expr::var(n);
    let s = yn.sub(&xn.mul(&g));
    let half_xn2 = xn.mul(&xn).mul(&crate::fields::Expr::constant(0.5));
    let big_f = s.mul(&xn).add(&s.mul(&h)).add(&k).add(&half_xn2.mul(&g));
    let mut comps: Vec<_> = (0..n - 1)
        .map(|a| {
            s.mul(&h.diff(a))
                .add(&k.diff(a))
                .add(&half_xn2.mul(&g.diff(a)))
        })
        .collect();
    comps.push(big_f);
    GraphSubmanifold::standard(n, n + 1, comps)
}

/// `y1 = x1 * xn`: not coisotropic.
pub fn counterexample(n: usize) -> Result<GraphSubmanifold> {
    let mut comps = vec!["0".to_string(); n];
    comps[0] = format!("x1*x{n}");
    from_strings(n, n + 1, &comps)
}

/// `y_i = 0` for `i <= 2n - k`, `z = sum over free pairs (x_j^2 + y_j^2) / 2`.
pub fn higher(n: usize, k: usize) -> Result<GraphSubmanifold> {
    let mut comps = vec!["0".to_string(); 2 * n - k];
    let terms: Vec<String> = (2 * n - k + 1..=n)
        .map(|j| format!("x{j}^2 + y{j}^2"))
        .collect();
    comps.push(format!("({})/2", terms.join(" + ")));
    from_strings(n, k, &comps)
}

fn from_strings(n: usize, k: usize, comps: &[String]) -> Result<GraphSubmanifold> {
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    GraphSubmanifold::standard_from_strs(n, k, &refs)
}
