use petgraph::unionfind::UnionFind;

use super::{CorruptionSpec, ErrorType, SeveritySchedule};
use crate::error::CorruptError;
use crate::tabular::{pearson_matrix, Dataset};

fn check_cell_errors(error_types: &[ErrorType]) -> Result<(), CorruptError> {
    if error_types.is_empty() {
        return Err(CorruptError::EmptyErrorTypes);
    }
    match error_types.iter().find(|e| !e.is_feature_error()) {
        Some(e) => Err(CorruptError::NotACellError(e.name())),
        None => Ok(()),
    }
}

/// One spec per (error type, feature), error type major.
///
/// The product is complete: kind compatibility (outliers on a categorical
/// column) is left to [`CorruptionSpec::validate`] so that the generated
/// count always equals `|error_types| * |features|`.
pub fn one_feature_at_a_time(
    d0: &Dataset,
    error_types: &[ErrorType],
    features: &[String],
    schedule: &SeveritySchedule,
) -> Result<Vec<CorruptionSpec>, CorruptError> {
    if features.is_empty() {
        return Err(CorruptError::EmptyFeatureList);
    }
    check_cell_errors(error_types)?;
    for f in features {
        if d0.column_index(f).is_none() {
            return Err(CorruptError::FeatureNotFound(f.clone()));
        }
        if f == d0.target_name() {
            return Err(CorruptError::FeatureIsTarget(f.clone()));
        }
    }
    Ok(error_types
        .iter()
        .flat_map(|et| {
            features
                .iter()
                .map(move |f| CorruptionSpec::new(et.clone(), vec![f.clone()], schedule.clone()))
        })
        .collect())
}

/// Connected components (size >= 2) of the graph over numeric features with
/// an edge wherever `|r| >= threshold`. Groups are ordered by their first
/// column; members keep schema order.
pub fn correlated_groups(d0: &Dataset, threshold: f64) -> Result<Vec<Vec<String>>, CorruptError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(CorruptError::InvalidThreshold(threshold));
    }
    let m = pearson_matrix(d0)?;
    let k = m.len();
    let mut uf = UnionFind::<usize>::new(k);
    for i in 0..k {
        for j in (i + 1)..k {
            if !m.is_degenerate(i, j) && m.at(i, j).abs() >= threshold {
                uf.union(i, j);
            }
        }
    }
    let labels = uf.into_labeling();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of_group: Vec<usize> = Vec::new();
    for (i, &root) in labels.iter().enumerate() {
        match root_of_group.iter().position(|&r| r == root) {
            Some(g) => groups[g].push(i),
            None => {
                root_of_group.push(root);
                groups.push(vec![i]);
            }
        }
    }
    Ok(groups
        .into_iter()
        .filter(|g| g.len() >= 2)
        .map(|g| g.into_iter().map(|i| m.names[i].clone()).collect())
        .collect())
}

/// One spec per (error type, correlated group), error type major.
pub fn correlated_features(
    d0: &Dataset,
    error_types: &[ErrorType],
    threshold: f64,
    schedule: &SeveritySchedule,
) -> Result<Vec<CorruptionSpec>, CorruptError> {
    check_cell_errors(error_types)?;
    let groups = correlated_groups(d0, threshold)?;
    Ok(error_types
        .iter()
        .flat_map(|et| {
            groups
                .iter()
                .map(move |g| CorruptionSpec::new(et.clone(), g.clone(), schedule.clone()))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::read_csv;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn random_table(seed: u64, cols: usize, rows: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut text = (0..cols).map(|c| format!("f{c}")).collect::<Vec<_>>().join(",");
        text.push_str(",y\n");
        for r in 0..rows {
            for _ in 0..cols {
                text.push_str(&format!("{},", rng.random::<f64>()));
            }
            text.push_str(if r % 2 == 0 { "a\n" } else { "b\n" });
        }
        read_csv(text.as_bytes(), "y", None, "r").unwrap()
    }

    #[test]
    fn product_is_type_major() {
        let d = random_table(1, 3, 20);
        let specs = one_feature_at_a_time(
            &d,
            &[ErrorType::noisy(), ErrorType::outliers()],
            &names(&["f0", "f1", "f2"]),
            &SeveritySchedule::standard(),
        )
        .unwrap();
        assert_eq!(specs.len(), 6);
        assert_eq!(specs[0].features, ["f0"]);
        assert_eq!(specs[2].features, ["f2"]);
        assert_eq!(specs[3].error_type, ErrorType::outliers());
    }

    #[test]
    fn seventeen_features_two_types() {
        let d = random_table(2, 17, 30);
        let feats: Vec<String> = (0..17).map(|c| format!("f{c}")).collect();
        let specs = one_feature_at_a_time(
            &d,
            &[ErrorType::noisy(), ErrorType::outliers()],
            &feats,
            &SeveritySchedule::standard(),
        )
        .unwrap();
        assert_eq!(specs.len(), 34);
    }

    #[test]
    fn empty_features_rejected() {
        let d = random_table(3, 2, 10);
        assert!(matches!(
            one_feature_at_a_time(&d, &[ErrorType::noisy()], &[], &SeveritySchedule::standard()),
            Err(CorruptError::EmptyFeatureList)
        ));
        assert!(matches!(
            one_feature_at_a_time(
                &d,
                &[ErrorType::Duplication],
                &names(&["f0"]),
                &SeveritySchedule::standard()
            ),
            Err(CorruptError::NotACellError(_))
        ));
    }

    #[test]
    fn perfect_threshold_gives_no_groups() {
        let d = random_table(4, 5, 50);
        assert!(correlated_groups(&d, 1.0).unwrap().is_empty());
    }

    #[test]
    fn duplicated_column_forms_a_group() {
        let d = read_csv(
            "a,b,c,y\n1,1,9,p\n2,2,1,q\n3,3,5,p\n4,4,2,q\n".as_bytes(),
            "y",
            None,
            "m",
        )
        .unwrap();
        let groups = correlated_groups(&d, 0.9).unwrap();
        assert_eq!(groups, vec![names(&["a", "b"])]);
        let specs = correlated_features(
            &d,
            &[ErrorType::noisy(), ErrorType::outliers()],
            0.9,
            &SeveritySchedule::standard(),
        )
        .unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[1].features, ["a", "b"]);
    }

    #[test]
    fn transitive_components_merge() {
        // a~b and b~c strongly, a~c weaker but still connected through b.
        let d = read_csv(
            "a,b,c,d,y\n1,1.1,1.3,5,p\n2,2.1,1.9,-1,q\n3,2.9,3.2,4,p\n4,4.2,3.9,0,q\n5,5.0,5.3,2,p\n"
                .as_bytes(),
            "y",
            None,
            "m",
        )
        .unwrap();
        let groups = correlated_groups(&d, 0.95).unwrap();
        assert_eq!(groups, vec![names(&["a", "b", "c"])]);
    }

    #[test]
    fn threshold_bounds() {
        let d = random_table(5, 3, 10);
        assert!(matches!(
            correlated_groups(&d, 1.5),
            Err(CorruptError::InvalidThreshold(_))
        ));
        assert!(matches!(
            correlated_groups(&d, 0.0),
            Err(CorruptError::InvalidThreshold(_))
        ));
    }
}
