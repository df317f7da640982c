//! Synthetic hourly weather and PV production.
//!
//! Irradiance comes from a geometric clear-sky model attenuated by a bounded
//! AR(1) cloud process; temperature, humidity and wind are simple seasonal,
//! diurnal and noise components; power follows a linear PV model with
//! temperature derating and wind cooling. Timestamps are treated as local
//! solar time at longitude 0.
//!
//! Each series draws from its own ChaCha8 stream derived from the config
//! seed, so the frame is a pure function of the config.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded_rng, Rng};
use crate::timeseries::{Column, ColumnKind, Schema, TimeSeriesFrame, Timestamp};

/// Clear-sky irradiance at solar elevation 90°, W/m².
pub const CLEAR_SKY_PEAK: f64 = 1000.0;
/// Earth's axial tilt, degrees.
pub const AXIAL_TILT_DEG: f64 = 23.44;
/// Latitude limit of the model (no polar day/night handling).
pub const MAX_LATITUDE_DEG: f64 = 66.0;
/// Irradiance at or above which an hour counts as sunshine, W/m².
pub const SUNSHINE_THRESHOLD: f64 = 120.0;

pub const TIMESTAMP_COLUMN: &str = "timestamp";
pub const IRRADIANCE: &str = "irradiance_wm2";
pub const CLOUD_COVER: &str = "cloud_cover";
pub const CLOUD_COVER_PCT: &str = "cloud_cover_pct";
pub const CLOUD_OKTAS: &str = "cloud_oktas";
pub const AMBIENT_TEMP: &str = "ambient_temp_f";
pub const HUMIDITY: &str = "relative_humidity_pct";
pub const WIND_SPEED: &str = "wind_speed_ms";
pub const SUNLIGHT_HOURS: &str = "sunlight_hours";
pub const WEATHER_CONDITION: &str = "weather_condition";
pub const POWER: &str = "power_kwh";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub latitude_deg: f64,
    pub start: Timestamp,
    pub n_hours: usize,
    pub cloud_persistence: f64,
    pub cloud_noise_sd: f64,
    /// Fraction of clear-sky irradiance removed at full cloud cover.
    pub cloud_attenuation: f64,
    pub panel_rated_kw: f64,
    pub temp_coeff_per_c: f64,
    pub noise_sd_kw: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            latitude_deg: 52.0,
            start: Timestamp::from_epoch_seconds(1_704_067_200), // 2024-01-01T00:00:00Z
            n_hours: 24 * 365,
            cloud_persistence: 0.9,
            cloud_noise_sd: 0.2,
            cloud_attenuation: 0.75,
            panel_rated_kw: 5.0,
            temp_coeff_per_c: 0.004,
            noise_sd_kw: 0.05,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.latitude_deg.abs() <= MAX_LATITUDE_DEG) {
            return bad(format!("latitude {} outside ±{MAX_LATITUDE_DEG}°", self.latitude_deg));
        }
        if self.n_hours < 48 {
            return bad(format!("n_hours must be >= 48, got {}", self.n_hours));
        }
        if !(0.0..1.0).contains(&self.cloud_persistence) {
            return bad(format!("cloud_persistence must be in [0, 1), got {}", self.cloud_persistence));
        }
        if !(self.cloud_noise_sd >= 0.0 && self.noise_sd_kw >= 0.0) {
            return bad("noise standard deviations must be >= 0".into());
        }
        if !(self.panel_rated_kw > 0.0) {
            return bad(format!("panel_rated_kw must be > 0, got {}", self.panel_rated_kw));
        }
        if !(0.0..=1.0).contains(&self.cloud_attenuation) {
            return bad(format!("cloud_attenuation must be in [0, 1], got {}", self.cloud_attenuation));
        }
        Ok(())
    }
}

/// Solar declination in degrees for a 1-based day of year.
pub fn declination_deg(day_of_year: u32) -> f64 {
    AXIAL_TILT_DEG * (2.0 * std::f64::consts::PI * (day_of_year as f64 - 81.0) / 365.0).sin()
}

/// `sin` of the solar elevation angle.
pub fn sin_elevation(timestamp: Timestamp, latitude_deg: f64) -> f64 {
    let phi = latitude_deg.to_radians();
    let delta = declination_deg(timestamp.day_of_year()).to_radians();
    let hour_angle = (15.0 * (timestamp.hour_of_day() - 12.0)).to_radians();
    phi.sin() * delta.sin() + phi.cos() * delta.cos() * hour_angle.cos()
}

/// Clear-sky global irradiance `max(0, S0·sin(elevation))`, W/m².
pub fn clear_sky_irradiance(timestamp: Timestamp, latitude_deg: f64) -> Result<f64> {
    if !(latitude_deg.abs() <= MAX_LATITUDE_DEG) {
        return Err(Error::InvalidParameter(format!("latitude {latitude_deg} outside ±{MAX_LATITUDE_DEG}°")));
    }
    Ok((CLEAR_SKY_PEAK * sin_elevation(timestamp, latitude_deg)).max(0.0))
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("sd validated non-negative and finite")
}

/// Bounded AR(1) cloud fraction: `c_0 = 0.5`,
/// `c_t = clamp(persistence·c_{t−1} + ε_t, 0, 1)`, `ε ~ N(0, noise_sd)`.
pub fn simulate_cloud_cover(n_hours: usize, persistence: f64, noise_sd: f64, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    cloud_series(n_hours, persistence, noise_sd, &mut rng)
}

fn cloud_series(n: usize, persistence: f64, noise_sd: f64, rng: &mut Rng) -> Vec<f64> {
    let eps = normal(noise_sd);
    let mut out = Vec::with_capacity(n);
    let mut c = 0.5;
    for t in 0..n {
        if t > 0 {
            c = (persistence * c + eps.sample(rng)).clamp(0.0, 1.0);
        }
        out.push(c);
    }
    out
}

pub fn fahrenheit_to_celsius(f: f64) -> f64 {
    (f - 32.0) * 5.0 / 9.0
}

pub fn celsius_to_fahrenheit(c: f64) -> f64 {
    c * 9.0 / 5.0 + 32.0
}

/// Energy delivered over one hour, kWh.
///
/// Cell temperature `T_c = T_amb + 0.03·G − wind` (°C), never below ambient;
/// `P = rated·(G/1000)·(1 − coeff·max(0, T_c − 25))`, clamped at 0.
pub fn power_from_weather(irradiance: f64, ambient_f: f64, wind_ms: f64, config: &SynthConfig) -> f64 {
    let ambient_c = fahrenheit_to_celsius(ambient_f);
    let cell_c = (ambient_c + 0.03 * irradiance - wind_ms).max(ambient_c);
    let derate = 1.0 - config.temp_coeff_per_c * (cell_c - 25.0).max(0.0);
    (config.panel_rated_kw * (irradiance / CLEAR_SKY_PEAK) * derate).max(0.0)
}

/// Okta band label: clear (0–2), partly cloudy (3–5), overcast (6–8).
pub fn weather_condition(oktas: i64) -> &'static str {
    match oktas {
        i64::MIN..=2 => "clear",
        3..=5 => "partly cloudy",
        _ => "overcast",
    }
}

/// Schema of the frames produced by [`generate_dataset`].
pub fn schema() -> Schema {
    Schema::new(TIMESTAMP_COLUMN)
        .with(IRRADIANCE, ColumnKind::continuous("W/m2"))
        .with(CLOUD_COVER, ColumnKind::continuous("fraction"))
        .with(CLOUD_COVER_PCT, ColumnKind::continuous("%"))
        .with(CLOUD_OKTAS, ColumnKind::Integer)
        .with(AMBIENT_TEMP, ColumnKind::continuous("F"))
        .with(HUMIDITY, ColumnKind::continuous("%"))
        .with(WIND_SPEED, ColumnKind::continuous("m/s"))
        .with(SUNLIGHT_HOURS, ColumnKind::continuous("hrs"))
        .with(WEATHER_CONDITION, ColumnKind::Categorical)
        .with(POWER, ColumnKind::continuous("kWh"))
}

// Stream identifiers for the independent noise series.
const STREAM_CLOUD: u64 = 1;
const STREAM_TEMP: u64 = 2;
const STREAM_HUMIDITY: u64 = 3;
const STREAM_WIND: u64 = 4;
const STREAM_POWER: u64 = 5;

/// Generate an hourly frame following [`schema`].
pub fn generate_dataset(config: &SynthConfig) -> Result<TimeSeriesFrame> {
    config.validate()?;
    let n = config.n_hours;
    let stream = |id: u64| seeded_rng(derive_seed(config.seed, &[id]));
    let timestamps: Vec<Timestamp> =
        (0..n as i64).map(|i| Timestamp::from_epoch_seconds(config.start.epoch_seconds() + 3600 * i)).collect();

    let cloud = cloud_series(n, config.cloud_persistence, config.cloud_noise_sd, &mut stream(STREAM_CLOUD));
    let clear: Vec<f64> =
        timestamps.iter().map(|&t| clear_sky_irradiance(t, config.latitude_deg)).collect::<Result<_>>()?;
    let irradiance: Vec<f64> =
        clear.iter().zip(&cloud).map(|(g, c)| g * (1.0 - config.cloud_attenuation * c)).collect();

    // Ambient temperature: seasonal and diurnal sinusoids plus AR(1) noise.
    let hemisphere = if config.latitude_deg < 0.0 { -1.0 } else { 1.0 };
    let tau = 2.0 * std::f64::consts::PI;
    let mut rng = stream(STREAM_TEMP);
    let temp_eps = normal(0.6);
    let mut temp_noise = 0.0;
    let ambient_f: Vec<f64> = timestamps
        .iter()
        .zip(&cloud)
        .map(|(t, c)| {
            temp_noise = 0.9 * temp_noise + temp_eps.sample(&mut rng);
            let seasonal = 9.0 * hemisphere * (tau * (t.day_of_year() as f64 - 109.0) / 365.0).sin();
            let diurnal = 4.0 * (1.0 - 0.5 * c) * (tau * (t.hour_of_day() - 15.0) / 24.0).cos();
            celsius_to_fahrenheit(10.0 + seasonal + diurnal + temp_noise)
        })
        .collect();

    let mut rng = stream(STREAM_HUMIDITY);
    let hum_eps = normal(4.0);
    let humidity: Vec<f64> = irradiance
        .iter()
        .zip(&cloud)
        .map(|(g, c)| (75.0 - 35.0 * g / CLEAR_SKY_PEAK + 15.0 * c + hum_eps.sample(&mut rng)).clamp(5.0, 100.0))
        .collect();

    let mut rng = stream(STREAM_WIND);
    let wind_eps = normal(0.3);
    let mut log_wind = 0.0;
    let wind: Vec<f64> = (0..n)
        .map(|_| {
            log_wind = 0.8 * log_wind + wind_eps.sample(&mut rng);
            3.0 * f64::exp(log_wind)
        })
        .collect();

    // Sunshine hours per UTC day, broadcast to every row of that day.
    let mut sunlight = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let day = timestamps[start].day_index();
        let end = (start..n).find(|&i| timestamps[i].day_index() != day).unwrap_or(n);
        let hours = irradiance[start..end].iter().filter(|&&g| g >= SUNSHINE_THRESHOLD).count() as f64;
        sunlight[start..end].fill(hours);
        start = end;
    }

    let mut rng = stream(STREAM_POWER);
    let power_eps = normal(config.noise_sd_kw);
    let power: Vec<f64> = (0..n)
        .map(|i| {
            let clean = power_from_weather(irradiance[i], ambient_f[i], wind[i], config);
            (clean + power_eps.sample(&mut rng)).max(0.0)
        })
        .collect();

    let oktas: Vec<i64> = cloud.iter().map(|c| (8.0 * c).round() as i64).collect();
    TimeSeriesFrame::new(
        timestamps,
        vec![
            Column::dense(IRRADIANCE, "W/m2", irradiance),
            Column::dense(CLOUD_COVER, "fraction", cloud.clone()),
            Column::dense(CLOUD_COVER_PCT, "%", cloud.iter().map(|c| 100.0 * c).collect()),
            Column::integer(CLOUD_OKTAS, oktas.iter().copied().map(Some).collect()),
            Column::dense(AMBIENT_TEMP, "F", ambient_f),
            Column::dense(HUMIDITY, "%", humidity),
            Column::dense(WIND_SPEED, "m/s", wind),
            Column::dense(SUNLIGHT_HOURS, "hrs", sunlight),
            Column::categorical(
                WEATHER_CONDITION,
                oktas.iter().map(|&o| Some(weather_condition(o).to_string())).collect(),
            ),
            Column::dense(POWER, "kWh", power),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> Timestamp {
        s.parse().unwrap()
    }

    #[test]
    fn midnight_is_dark() {
        for lat in [-45.0, 0.0, 30.0, 52.0] {
            assert_eq!(clear_sky_irradiance(ts("2024-03-21T00:00:00Z"), lat).unwrap(), 0.0);
        }
    }

    #[test]
    fn equator_equinox_noon() {
        // 2023-03-22 is day 81
        let t = ts("2023-03-22T12:00:00Z");
        assert_eq!(t.day_of_year(), 81);
        assert!((clear_sky_irradiance(t, 0.0).unwrap() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn solstice_noon_at_40n() {
        let t = ts("2023-06-21T12:00:00Z"); // day 172
        let g = clear_sky_irradiance(t, 40.0).unwrap();
        let expected = 1000.0 * (90.0f64 - 40.0 + declination_deg(172)).to_radians().sin();
        assert!((g - expected).abs() < 1e-9);
        assert!((g - 958.5).abs() < 0.2, "{g}");
    }

    #[test]
    fn latitude_out_of_range() {
        assert!(clear_sky_irradiance(ts("2024-01-01T12:00:00Z"), 70.0).is_err());
    }

    #[test]
    fn cloud_recurrence_without_noise() {
        let c = simulate_cloud_cover(4, 0.9, 0.0, 1);
        let expected = [0.5, 0.45, 0.405, 0.3645];
        for (a, b) in c.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cloud_bounded_and_seeded() {
        for seed in 0..5 {
            let c = simulate_cloud_cover(2000, 0.95, 0.5, seed);
            assert!(c.iter().all(|v| (0.0..=1.0).contains(v)));
            assert_eq!(c, simulate_cloud_cover(2000, 0.95, 0.5, seed));
        }
    }

    #[test]
    fn power_examples() {
        let cfg = SynthConfig { panel_rated_kw: 2.0, ..Default::default() };
        assert_eq!(power_from_weather(0.0, 70.0, 3.0, &cfg), 0.0);
        // ambient 25 °C = 77 °F; 0.03·1000 − 30 m/s wind brings T_c back to 25
        assert!((power_from_weather(1000.0, 77.0, 30.0, &cfg) - 2.0).abs() < 1e-12);
        let p = power_from_weather(800.0, 86.0, 5.0, &cfg); // 30 °C
        assert!((p - 2.0 * 0.7232).abs() < 1e-12, "{p}");
    }

    #[test]
    fn condition_bands() {
        assert_eq!(weather_condition(0), "clear");
        assert_eq!(weather_condition(2), "clear");
        assert_eq!(weather_condition(3), "partly cloudy");
        assert_eq!(weather_condition(5), "partly cloudy");
        assert_eq!(weather_condition(6), "overcast");
        assert_eq!(weather_condition(8), "overcast");
    }

    #[test]
    fn dataset_shape_and_determinism() {
        let cfg = SynthConfig { n_hours: 24 * 10, ..Default::default() };
        let a = generate_dataset(&cfg).unwrap();
        assert_eq!(a.len(), 240);
        let names: Vec<String> = schema().columns.into_iter().map(|(n, _)| n).collect();
        assert_eq!(a.column_names(), names.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(a, generate_dataset(&cfg).unwrap());
        let other = generate_dataset(&SynthConfig { seed: 7, ..cfg.clone() }).unwrap();
        assert_ne!(a, other);

        let g = a.continuous(IRRADIANCE).unwrap();
        let p = a.continuous(POWER).unwrap();
        assert!(g.iter().all(|v| v.unwrap() >= 0.0));
        assert!(p.iter().all(|v| v.unwrap() >= 0.0));
        assert!(matches!(
            generate_dataset(&SynthConfig { n_hours: 47, ..Default::default() }),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn clear_day_peaks_at_noon() {
        let cfg = SynthConfig { cloud_noise_sd: 0.0, cloud_attenuation: 0.0, n_hours: 48, ..Default::default() };
        let f = generate_dataset(&cfg).unwrap();
        let g = f.continuous(IRRADIANCE).unwrap();
        let noon = g[12].unwrap();
        assert!(g[..24].iter().all(|v| v.unwrap() <= noon));
    }
}
