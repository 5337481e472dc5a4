use cvoa::nn::{generate_net_patient_zero, surrogate_fitness, NetCodec, NetGenotype};
use cvoa::{Codec, RandomSource};

/// Reference distance computed from the text form alone.
fn oracle(a: &str, b: &str) -> f64 {
    fn split(s: &str) -> (i64, i64, Vec<i64>) {
        let nums: Vec<Vec<i64>> = s
            .trim_matches(|c| c == '{' || c == '}')
            .split("}{")
            .map(|part| part.split(',').map(|x| x.trim().parse().unwrap()).collect())
            .collect();
        (nums[0][0], nums[0][1], nums[1].clone())
    }
    let (lr_a, drop_a, layers_a) = split(a);
    let (lr_b, drop_b, layers_b) = split(b);
    let mut total = (lr_a - lr_b).abs() + (drop_a - drop_b).abs();
    total += 2 * (layers_a.len() as i64 - layers_b.len() as i64).abs();
    for i in 0..layers_a.len().max(layers_b.len()) {
        total += match (layers_a.get(i), layers_b.get(i)) {
            (Some(x), Some(y)) => (x - y).abs(),
            _ => 12,
        };
    }
    total as f64
}

fn all_two_layer_genotypes() -> Vec<NetGenotype> {
    let mut out = Vec::with_capacity(7776);
    for lr in 0..=5 {
        for drop in 0..=8 {
            for a in 0..=11 {
                for b in 0..=11 {
                    out.push(NetGenotype::new(lr, drop, vec![a, b]).unwrap());
                }
            }
        }
    }
    out
}

#[test]
fn surrogate_matches_reference_on_every_two_layer_genotype() {
    let all = all_two_layer_genotypes();
    assert_eq!(all.len(), 7776);
    let targets = ["{2,4,2}{5,7}", "{0,0,3}{0,0,0}", "{4,0,8}{9,7,2,7,2,7,10,7}", "{5,8,2}{11,11}"];
    for target in targets {
        let target_g: NetGenotype = target.parse().unwrap();
        let codec = NetCodec::surrogate(target_g.clone());
        let mut zeros = 0;
        for g in &all {
            let text = g.to_string();
            let expected = oracle(&text, &target_g.to_string());
            assert_eq!(codec.fitness(g).unwrap(), expected, "{text} vs {target}");
            assert_eq!(surrogate_fitness(&target_g, g), expected);
            zeros += usize::from(expected == 0.0);
        }
        assert_eq!(zeros, usize::from(target_g.layer_count() == 2));
    }
}

#[test]
fn patient_zero_is_uniform_over_each_element() {
    let mut rng = RandomSource::seed_from_u64(11);
    let draws = 10_000;
    let mut layer_counts = [0usize; 12];
    let mut lr_zero = 0;
    let mut drop_zero = 0;
    for _ in 0..draws {
        let g = generate_net_patient_zero(&mut rng);
        layer_counts[g.layer_count()] += 1;
        lr_zero += usize::from(g.lr_code() == 0);
        drop_zero += usize::from(g.drop_code() == 0);
    }
    for (count, &hits) in layer_counts.iter().enumerate().skip(2) {
        let freq = hits as f64 / draws as f64;
        assert!((freq - 0.1).abs() <= 0.02, "L={count}: {freq}");
    }
    assert!((lr_zero as f64 / draws as f64 - 1.0 / 6.0).abs() <= 0.02);
    assert!((drop_zero as f64 / draws as f64 - 1.0 / 9.0).abs() <= 0.02);
}
