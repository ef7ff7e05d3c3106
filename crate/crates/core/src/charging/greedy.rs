use super::EvSession;

/// Fill one session's window cheapest step first, ties to the earliest step.
/// Steps with a negative price are taken at full power regardless of demand.
/// Returns `(step, kW)` pairs with non-zero power.
pub(super) fn fill_session(session: &EvSession, prices: &[f64], socket_kw: f64, step_hours: f64) -> Vec<(usize, f64)> {
    let mut order: Vec<usize> = session.window().collect();
    order.sort_by(|&a, &b| prices[a].total_cmp(&prices[b]).then(a.cmp(&b)));
    let step_kwh = socket_kw * step_hours;
    let mut remaining = session.demand_kwh;
    let mut out = Vec::new();
    for t in order {
        if prices[t] < 0.0 {
            out.push((t, socket_kw));
            remaining -= step_kwh;
        } else if remaining > 0.0 {
            let kwh = remaining.min(step_kwh);
            out.push((t, kwh / step_hours));
            remaining -= kwh;
        } else {
            break;
        }
    }
    out.sort_by_key(|&(t, _)| t);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_go_to_earliest_step() {
        let s = EvSession {
            id: 0,
            arrival: 1,
            departure: 5,
            demand_kwh: 7.5,
        };
        let prices = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0];
        let got = fill_session(&s, &prices, 10.0, 0.5);
        assert_eq!(got, vec![(2, 10.0), (3, 5.0)]);
    }

    #[test]
    fn zero_demand_charges_nothing() {
        let s = EvSession {
            id: 0,
            arrival: 0,
            departure: 3,
            demand_kwh: 0.0,
        };
        assert!(fill_session(&s, &[1.0, 0.0, 2.0], 10.0, 1.0).is_empty());
    }
}
