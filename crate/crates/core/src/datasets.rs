//! Built-in datasets.

use serde::Serialize;

use crate::series::TimeSeries;

/// A named series with the number of leading points used for training.
#[derive(Debug, Clone, Serialize)]
pub struct Dataset {
    pub name: &'static str,
    pub description: &'static str,
    pub series: TimeSeries,
    pub train_len: usize,
    /// Whether the published ONGBM results for this series apply the
    /// initial-condition correction.
    pub correct_initial: bool,
}

pub const NAMES: [&str; 2] = ["vietnam-gdp", "covid-global"];

const GDP_YEARS: [&str; 15] = [
    "2004", "2005", "2006", "2007", "2008", "2009", "2010", "2011", "2012", "2013", "2014", "2015",
    "2016", "2017", "2018",
];

/// Vietnam annual GDP, billion USD.
const GDP_VALUES: [f64; 15] = [
    45.42785, 57.63326, 66.37166, 77.41443, 99.13030, 106.01466, 115.93175, 135.53944, 155.82000,
    171.22203, 186.20465, 193.24111, 205.27617, 223.77987, 245.21369,
];

const COVID_DATES: [&str; 12] = [
    "2020-01-28",
    "2020-01-29",
    "2020-01-30",
    "2020-01-31",
    "2020-02-01",
    "2020-02-02",
    "2020-02-03",
    "2020-02-04",
    "2020-02-05",
    "2020-02-06",
    "2020-02-07",
    "2020-02-08",
];

/// Cumulative confirmed COVID-19 cases worldwide.
const COVID_VALUES: [f64; 12] = [
    6061.0, 7816.0, 9821.0, 11948.0, 14551.0, 17387.0, 20626.0, 24553.0, 28276.0, 31439.0, 34875.0,
    37552.0,
];

fn build(labels: &[&str], values: &[f64]) -> TimeSeries {
    TimeSeries::new(
        labels.iter().map(|s| s.to_string()).collect(),
        values.to_vec(),
    )
    .expect("built-in dataset is valid")
}

/// Vietnam GDP 2004–2018. The first ten years are the training span.
pub fn vietnam_gdp() -> TimeSeries {
    build(&GDP_YEARS, &GDP_VALUES)
}

/// Global cumulative COVID-19 cases, 2020-01-28 to 2020-02-08.
pub fn covid_global() -> TimeSeries {
    build(&COVID_DATES, &COVID_VALUES)
}

pub fn by_name(name: &str) -> Option<Dataset> {
    match name {
        "vietnam-gdp" => Some(Dataset {
            name: "vietnam-gdp",
            description: "Vietnam annual GDP 2004-2018, billion USD",
            series: vietnam_gdp(),
            train_len: 10,
            correct_initial: true,
        }),
        "covid-global" => Some(Dataset {
            name: "covid-global",
            description: "Global cumulative COVID-19 cases 2020-01-28..2020-02-08",
            series: covid_global(),
            train_len: 12,
            correct_initial: false,
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_by_name() {
        for name in NAMES {
            let d = by_name(name).unwrap();
            assert_eq!(d.name, name);
            assert!(d.train_len <= d.series.len());
        }
        assert!(by_name("nope").is_none());
    }

    #[test]
    fn values_match_published_columns() {
        let gdp = vietnam_gdp();
        assert_eq!(gdp.len(), 15);
        assert_eq!(gdp.values()[0], 45.42785);
        assert_eq!(gdp.values()[14], 245.21369);
        assert_eq!(gdp.labels()[14], "2018");
        let covid = covid_global();
        assert_eq!(covid.len(), 12);
        assert_eq!(covid.values()[11], 37552.0);
        assert_eq!(covid.labels()[0], "2020-01-28");
    }
}
