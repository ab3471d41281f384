use crate::error::{NlpError, NlpResult};

/// A token split reshaped into `batch` contiguous streams; successive BPTT
/// windows are adjacent within each stream. Layout is row-major
/// [batch, stream_len]; the trailing remainder of the split is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamMatrix {
    data: Vec<usize>,
    pub batch: usize,
    pub stream_len: usize,
}

pub fn batchify(tokens: &[usize], batch: usize) -> NlpResult<StreamMatrix> {
    if tokens.is_empty() {
        return Err(NlpError::Contract("batchify over an empty split".into()));
    }
    if batch == 0 || tokens.len() < batch {
        return Err(NlpError::Contract(format!(
            "cannot split {} tokens into {batch} streams",
            tokens.len()
        )));
    }
    let stream_len = tokens.len() / batch;
    let mut data = Vec::with_capacity(batch * stream_len);
    for b in 0..batch {
        data.extend_from_slice(&tokens[b * stream_len..(b + 1) * stream_len]);
    }
    Ok(StreamMatrix {
        data,
        batch,
        stream_len,
    })
}

impl StreamMatrix {
    pub fn stream(&self, b: usize) -> &[usize] {
        &self.data[b * self.stream_len..(b + 1) * self.stream_len]
    }

    /// BPTT windows: (inputs, targets) pairs where targets are inputs
    /// shifted one token right, both flattened [batch, steps] row-major.
    /// The final window may be shorter than `seq_len`.
    pub fn windows(&self, seq_len: usize) -> Vec<(Vec<usize>, Vec<usize>, usize)> {
        let mut out = Vec::new();
        if self.stream_len < 2 {
            return out;
        }
        let mut start = 0;
        while start + 1 < self.stream_len {
            let steps = seq_len.min(self.stream_len - 1 - start);
            let mut inputs = Vec::with_capacity(self.batch * steps);
            let mut targets = Vec::with_capacity(self.batch * steps);
            for b in 0..self.batch {
                let s = self.stream(b);
                inputs.extend_from_slice(&s[start..start + steps]);
                targets.extend_from_slice(&s[start + 1..start + steps + 1]);
            }
            out.push((inputs, targets, steps));
            start += steps;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hundred_three_tokens_into_ten_streams() {
        let tokens: Vec<usize> = (0..103).collect();
        let m = batchify(&tokens, 10).unwrap();
        assert_eq!(m.batch, 10);
        assert_eq!(m.stream_len, 10);
        // 3 trailing tokens dropped; stream 0 is the first 10 tokens.
        assert_eq!(m.stream(0), (0..10).collect::<Vec<_>>());
        assert_eq!(m.stream(9), (90..100).collect::<Vec<_>>());
    }

    #[test]
    fn windows_are_adjacent_per_stream() {
        let tokens: Vec<usize> = (0..40).collect();
        let m = batchify(&tokens, 2).unwrap(); // streams of 20
        let ws = m.windows(7);
        // 19 predicted positions per stream: windows of 7, 7, 5.
        assert_eq!(ws.len(), 3);
        assert_eq!(ws[0].2, 7);
        assert_eq!(ws[2].2, 5);
        // Window t+1 begins where window t ended.
        let w0_last_input = ws[0].0[6]; // stream 0, last input of window 0
        let w1_first_input = ws[1].0[0];
        assert_eq!(w1_first_input, w0_last_input + 1);
        // Targets are inputs shifted by one.
        assert_eq!(ws[0].1[0], ws[0].0[0] + 1);
    }

    #[test]
    fn same_input_twice_is_identical() {
        let tokens: Vec<usize> = (0..50).map(|i| i * 3 % 17).collect();
        assert_eq!(batchify(&tokens, 5).unwrap(), batchify(&tokens, 5).unwrap());
    }

    #[test]
    fn empty_split_is_rejected() {
        assert!(batchify(&[], 4).is_err());
        assert!(batchify(&[1, 2], 4).is_err());
    }
}
