use crate::error::{Error, Result};
use crate::frame::{Column, FeatureMatrix, FeatureSet, Unit};

pub const CONTROL_AREAS: [&str; 4] = ["50hertz", "amprion", "tennet", "transnet"];
/// Control areas with offshore wind.
pub const OFFSHORE_AREAS: [&str; 2] = ["50hertz", "tennet"];
pub const NORTH_AREAS: [&str; 2] = ["50hertz", "tennet"];
pub const SOUTH_HYDRO_AREAS: [&str; 2] = ["tennet", "transnet"];
pub const NEIGHBOURS: [&str; 7] = ["AT", "CH", "CZ", "DK", "FR", "NL", "PL"];

pub const WIND_NORTH: &str = "wind_north";
pub const HYDRO_SOUTH: &str = "hydro_south";
pub const SOLAR_DE: &str = "solar_DE";
pub const PRICE_DE: &str = "price_DE";

pub const REDUCED_FEATURES: [&str; 6] = [
    WIND_NORTH,
    HYDRO_SOUTH,
    "flow_DK",
    "flow_FR",
    SOLAR_DE,
    "residual_load_transnet",
];

pub fn load(ca: &str) -> String {
    format!("load_{ca}")
}
pub fn wind_onshore(ca: &str) -> String {
    format!("wind_onshore_{ca}")
}
pub fn wind_offshore(ca: &str) -> String {
    format!("wind_offshore_{ca}")
}
pub fn solar(ca: &str) -> String {
    format!("solar_{ca}")
}
pub fn hydro(ca: &str) -> String {
    format!("hydro_{ca}")
}
pub fn gen_rest(ca: &str) -> String {
    format!("gen_rest_{ca}")
}
pub fn residual_load(ca: &str) -> String {
    format!("residual_load_{ca}")
}
/// Scheduled net export from Germany to `zone`, MW.
pub fn flow(zone: &str) -> String {
    format!("flow_{zone}")
}
pub fn price(zone: &str) -> String {
    format!("price_{zone}")
}
/// Neighbour price minus German price.
pub fn price_diff(zone: &str) -> String {
    format!("price_diff_{zone}")
}

/// Unit implied by a column name.
pub fn unit_for(name: &str) -> Unit {
    if name.starts_with("price") {
        Unit::EurPerMwh
    } else {
        Unit::Mw
    }
}

fn has_offshore(ca: &str) -> bool {
    OFFSHORE_AREAS.contains(&ca)
}

fn market_columns() -> Vec<String> {
    let mut out: Vec<String> = NEIGHBOURS.iter().map(|z| flow(z)).collect();
    out.extend(NEIGHBOURS.iter().map(|z| price(z)));
    out.extend(NEIGHBOURS.iter().map(|z| price_diff(z)));
    out
}

/// Every column the ingest stage produces, in canonical order.
pub fn base_columns() -> Vec<String> {
    let mut out: Vec<String> = CONTROL_AREAS.iter().map(|c| load(c)).collect();
    out.extend(CONTROL_AREAS.iter().map(|c| wind_onshore(c)));
    out.extend(OFFSHORE_AREAS.iter().map(|c| wind_offshore(c)));
    out.extend(CONTROL_AREAS.iter().map(|c| solar(c)));
    out.extend(CONTROL_AREAS.iter().map(|c| hydro(c)));
    out.extend(CONTROL_AREAS.iter().map(|c| gen_rest(c)));
    out.extend(market_columns());
    out.push(PRICE_DE.to_string());
    out
}

/// Base columns minus 50Hertz hydro and the German price (the latter only
/// enters through the price differences).
pub fn full_features() -> Vec<String> {
    let excluded = [hydro("50hertz"), PRICE_DE.to_string()];
    base_columns().into_iter().filter(|c| !excluded.contains(c)).collect()
}

/// Columns [`add_engineered_columns`] appends.
pub fn engineered_columns() -> Vec<String> {
    let mut out = vec![WIND_NORTH.to_string(), HYDRO_SOUTH.to_string(), SOLAR_DE.to_string()];
    out.extend(CONTROL_AREAS.iter().map(|c| residual_load(c)));
    out
}

/// Aggregates replace their constituents; loads give way to residual loads.
pub fn engineered_features() -> Vec<String> {
    let mut out = vec![wind_onshore("amprion"), wind_onshore("transnet")];
    out.extend(engineered_columns());
    out.extend(CONTROL_AREAS.iter().map(|c| gen_rest(c)));
    out.extend(market_columns());
    out
}

pub fn reduced_features() -> Vec<String> {
    REDUCED_FEATURES.iter().map(|s| s.to_string()).collect()
}

pub fn features_of(set: FeatureSet) -> Vec<String> {
    match set {
        FeatureSet::Base => base_columns(),
        FeatureSet::Full => full_features(),
        FeatureSet::Engineered => engineered_features(),
        FeatureSet::Reduced => reduced_features(),
    }
}

fn sum_of(base: &FeatureMatrix, name: &str, parts: &[String], unit: Unit) -> Result<Column> {
    let mut values = vec![0.0; base.n_rows()];
    for p in parts {
        let c = base.require(p).map_err(|_| {
            Error::schema(format!("column {p:?} is required to derive {name:?}"))
        })?;
        for (v, x) in values.iter_mut().zip(&c.values) {
            *v += x;
        }
    }
    Ok(Column::new(name, unit, values))
}

fn minus(mut col: Column, base: &FeatureMatrix, parts: &[String]) -> Result<Column> {
    for p in parts {
        let c = base.require(p).map_err(|_| {
            Error::schema(format!("column {p:?} is required to derive {:?}", col.name))
        })?;
        for (v, x) in col.values.iter_mut().zip(&c.values) {
            *v -= x;
        }
    }
    Ok(col)
}

fn wind_parts(ca: &str) -> Vec<String> {
    let mut v = vec![wind_onshore(ca)];
    if has_offshore(ca) {
        v.push(wind_offshore(ca));
    }
    v
}

/// Computes one engineered column, or `None` if `name` is not engineered.
pub fn derive_column(base: &FeatureMatrix, name: &str) -> Result<Option<Column>> {
    if name == WIND_NORTH {
        let parts: Vec<String> = NORTH_AREAS.iter().flat_map(|c| wind_parts(c)).collect();
        return sum_of(base, name, &parts, Unit::Mw).map(Some);
    }
    if name == HYDRO_SOUTH {
        let parts: Vec<String> = SOUTH_HYDRO_AREAS.iter().map(|c| hydro(c)).collect();
        return sum_of(base, name, &parts, Unit::Mw).map(Some);
    }
    if name == SOLAR_DE {
        let parts: Vec<String> = CONTROL_AREAS.iter().map(|c| solar(c)).collect();
        return sum_of(base, name, &parts, Unit::Mw).map(Some);
    }
    if let Some(ca) = name.strip_prefix("residual_load_") {
        if !CONTROL_AREAS.contains(&ca) {
            return Ok(None);
        }
        let l = sum_of(base, name, &[load(ca)], Unit::Mw)?;
        let mut renewables = wind_parts(ca);
        renewables.push(solar(ca));
        renewables.push(hydro(ca));
        return minus(l, base, &renewables).map(Some);
    }
    Ok(None)
}

/// Appends every engineered column, leaving existing ones untouched.
pub fn add_engineered_columns(base: &FeatureMatrix) -> Result<FeatureMatrix> {
    let mut out = base.clone();
    for name in engineered_columns() {
        if out.column(&name).is_some() {
            continue;
        }
        let col = derive_column(base, &name)?.expect("engineered name");
        out.push_column(col)?;
    }
    Ok(out)
}

/// Builds the requested feature set from a base table. Columns are taken as
/// they are when present and derived otherwise, so only the inputs a set
/// actually needs must exist.
pub fn engineer_features(base: &FeatureMatrix, set: FeatureSet) -> Result<FeatureMatrix> {
    let mut out = FeatureMatrix::new(base.hours().to_vec(), set)?;
    for name in features_of(set) {
        let col = match base.column(&name) {
            Some(c) => c.clone(),
            None => derive_column(base, &name)?
                .ok_or_else(|| Error::schema(format!("missing column {name:?}")))?,
        };
        out.push_column(col)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn base_matrix(value: impl Fn(&str) -> f64) -> FeatureMatrix {
        let cols = base_columns()
            .into_iter()
            .map(|n| {
                let v = value(&n);
                Column::new(n.clone(), unit_for(&n), vec![v, 2.0 * v])
            })
            .collect();
        FeatureMatrix::from_unindexed(cols).unwrap()
    }

    #[test]
    fn full_set_has_42_unique_columns() {
        let f = full_features();
        assert_eq!(f.len(), 42);
        assert_eq!(f.iter().collect::<HashSet<_>>().len(), 42);
        assert!(!f.contains(&"hydro_50hertz".to_string()));
        assert!(!f.contains(&PRICE_DE.to_string()));
    }

    #[test]
    fn engineered_set_drops_constituents() {
        let e = engineered_features();
        assert_eq!(e.iter().collect::<HashSet<_>>().len(), e.len());
        for gone in ["wind_onshore_tennet", "wind_offshore_50hertz", "hydro_tennet", "solar_amprion", "load_amprion", "hydro_50hertz"] {
            assert!(!e.contains(&gone.to_string()), "{gone}");
        }
        for kept in [WIND_NORTH, HYDRO_SOUTH, "wind_onshore_amprion", "residual_load_transnet"] {
            assert!(e.contains(&kept.to_string()), "{kept}");
        }
    }

    #[test]
    fn wind_north_sums_north_areas() {
        let b = base_matrix(|n| match n {
            "wind_onshore_tennet" => 3000.0,
            "wind_offshore_tennet" => 2000.0,
            "wind_onshore_50hertz" => 2500.0,
            "wind_offshore_50hertz" => 500.0,
            _ => 1.0,
        });
        let c = derive_column(&b, WIND_NORTH).unwrap().unwrap();
        assert_eq!(c.values, vec![8000.0, 16000.0]);
    }

    #[test]
    fn residual_load_subtracts_renewables() {
        let b = base_matrix(|n| match n {
            "load_amprion" => 10.0,
            "wind_onshore_amprion" => 2.0,
            "solar_amprion" => 1.0,
            "hydro_amprion" => 0.5,
            _ => 0.0,
        });
        let c = derive_column(&b, "residual_load_amprion").unwrap().unwrap();
        assert_eq!(c.values, vec![6.5, 13.0]);
    }

    #[test]
    fn adding_engineered_columns_keeps_existing_values() {
        let b = base_matrix(|n| n.len() as f64);
        let e = add_engineered_columns(&b).unwrap();
        assert_eq!(e.n_cols(), b.n_cols() + engineered_columns().len());
        for c in b.columns() {
            assert_eq!(e.column(&c.name).unwrap(), c);
        }
    }

    #[test]
    fn reduced_set_is_exactly_six() {
        let b = base_matrix(|_| 1.0);
        let r = engineer_features(&b, FeatureSet::Reduced).unwrap();
        assert_eq!(r.names(), reduced_features());
        assert_eq!(r.feature_set(), FeatureSet::Reduced);
    }

    #[test]
    fn missing_constituent_is_named() {
        let b = base_matrix(|_| 1.0).without("hydro_transnet");
        match engineer_features(&b, FeatureSet::Reduced) {
            Err(Error::SchemaMismatch(m)) => assert!(m.contains("hydro_transnet"), "{m}"),
            other => panic!("{other:?}"),
        }
    }
}
