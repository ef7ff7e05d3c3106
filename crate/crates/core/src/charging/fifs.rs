use super::{AllocationMatrix, ChargingInstance};
use crate::error::Result;

/// First-in first-served baseline: sessions in arrival order (ties by id)
/// charge at the highest power the socket and the remaining station headroom
/// allow, from arrival until their demand is met or they leave. Demand that
/// cannot be served is left as shortfall.
pub fn fifs_schedule(instance: &ChargingInstance) -> Result<AllocationMatrix> {
    instance.validate()?;
    let dt = instance.step_hours;
    let mut headroom = instance.station_capacity.clone();
    let mut alloc = AllocationMatrix::zeros(instance.steps(), instance.sessions.len());
    let mut order: Vec<usize> = (0..instance.sessions.len()).collect();
    order.sort_by_key(|&i| (instance.sessions[i].arrival, instance.sessions[i].id));
    for i in order {
        let s = &instance.sessions[i];
        let mut remaining = s.demand_kwh;
        for t in s.window() {
            if remaining <= 0.0 {
                break;
            }
            let kw = instance.socket_kw.min(headroom[t]).min(remaining / dt).max(0.0);
            if kw > 0.0 {
                alloc.set(t, i, kw);
                headroom[t] -= kw;
                remaining -= kw * dt;
            }
        }
    }
    Ok(alloc)
}

#[cfg(test)]
mod tests {
    use super::super::EvSession;
    use super::*;

    #[test]
    fn earlier_arrival_takes_the_headroom() {
        let inst = ChargingInstance {
            sessions: vec![
                EvSession {
                    id: 0,
                    arrival: 1,
                    departure: 3,
                    demand_kwh: 10.0,
                },
                EvSession {
                    id: 1,
                    arrival: 0,
                    departure: 2,
                    demand_kwh: 15.0,
                },
            ],
            socket_kw: 10.0,
            station_capacity: vec![15.0; 3],
            energy_price: vec![1.0; 3],
            emission_price: vec![0.0; 3],
            lambda: 0.0,
            step_hours: 1.0,
        };
        let a = fifs_schedule(&inst).unwrap();
        assert_eq!((a.get(0, 1), a.get(1, 1)), (10.0, 5.0));
        assert_eq!((a.get(1, 0), a.get(2, 0)), (10.0, 0.0));
        let a_late = a.session_energy(1.0);
        assert_eq!(a_late, vec![10.0, 15.0]);
    }
}
