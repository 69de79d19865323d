use super::params::{CostModel, LightingParams};

/// `area` m², `cm_added` thickness added.
pub fn loft_cost(area: f64, cm_added: f64, cm: &CostModel) -> f64 {
    area * (cm.loft_material * cm_added + cm.loft_install)
}

/// Material plus whole installation days.
pub fn windows_cost(area: f64, cm: &CostModel) -> f64 {
    if area <= 0.0 {
        return 0.0;
    }
    area * cm.window_material + (area * cm.install_days_per_m2).ceil() * cm.window_day_rate
}

pub fn lighting_cost(bulbs: u32, cm: &CostModel) -> f64 {
    f64::from(bulbs) * (cm.led_unit + cm.led_install_per_bulb)
}

pub fn lighting_cost_for(lp: &LightingParams, cm: &CostModel) -> f64 {
    lighting_cost(lp.bulbs_to_replace(), cm)
}

pub fn heat_pump_cost(floor_area: f64, cm: &CostModel) -> f64 {
    if floor_area > cm.hp_area_threshold {
        cm.hp_large_home
    } else {
        cm.hp_base
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_examples() {
        let cm = CostModel::default();
        assert_eq!(loft_cost(109.0, 15.0, &cm), 4087.5);
        assert_eq!(lighting_cost(0, &cm), 0.0);
        assert_eq!(heat_pump_cost(109.0, &cm), 11000.0);
        assert_eq!(heat_pump_cost(123.0, &cm), 11000.0);
        assert_eq!(heat_pump_cost(123.5, &cm), 16000.0);
        // 7.1 m² → 10.295 days → 11 days
        assert!((windows_cost(7.1, &cm) - (3550.0 + 11.0 * 120.0)).abs() < 1e-9);
        assert_eq!(windows_cost(0.0, &cm), 0.0);
        assert!((lighting_cost(12, &cm) - 127.2).abs() < 1e-9);
    }
}
