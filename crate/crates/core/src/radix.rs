//! Mixed-radix counting shared by CPD rows, decision-rule enumeration and
//! profile indexing. The last digit varies fastest everywhere.

/// Number of points in the product space, or `None` on overflow.
pub fn product(radices: &[usize]) -> Option<usize> {
    radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r))
}

/// Flat index of `digits` in the odometer over `radices`.
pub fn encode(radices: &[usize], digits: &[usize]) -> usize {
    debug_assert_eq!(radices.len(), digits.len());
    radices
        .iter()
        .zip(digits)
        .fold(0, |acc, (&r, &d)| acc * r + d)
}

/// Inverse of [`encode`], writing into `out`.
pub fn decode_into(radices: &[usize], mut index: usize, out: &mut [usize]) {
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
}

pub fn decode(radices: &[usize], index: usize) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    decode_into(radices, index, &mut out);
    out
}

/// Iterates every digit vector over `radices` in odometer order.
pub struct Odometer {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Odometer {
    pub fn new(radices: &[usize]) -> Self {
        let next = if radices.contains(&0) {
            None
        } else {
            Some(vec![0; radices.len()])
        };
        Odometer {
            radices: radices.to_vec(),
            next,
        }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.radices[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}
