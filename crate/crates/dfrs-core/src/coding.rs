//! Transmission schedule and wire format.
//!
//! Subcells take turns: at snapshot `t` the active subcell is
//! `((t - 1) mod M) + 1`, so a sensor in subcell `k` transmits at
//! snapshots `k, k + M, k + 2M, ...` and sends `T / M` bits overall, a
//! per-snapshot rate of `1 / M`.
//!
//! Each sensor's report is a single bitstream: the supercell label on
//! `ceil(log2 L)` bits, the subcell label on `ceil(log2 M)` bits (labels
//! 0-based on the wire, most significant bit first), then the payload bits
//! in snapshot order, zero-padded to a whole byte. A batch concatenates
//! messages, each preceded by a 4-byte little-endian length.
//!
//! The addressing overhead of a batch is `(N / T) log2(L M)` bits per
//! snapshot.

use crate::error::Error;
use crate::geometry::CellPartition;
use crate::Result;

/// 1-based subcell scheduled to transmit at snapshot `t` (1-based).
pub fn active_subcell(t: usize, m_count: usize) -> usize {
    (t - 1) % m_count + 1
}

/// Snapshots at which a sensor in subcell `k` transmits: `k, k + M, ...`.
pub fn transmission_snapshots(
    k: usize,
    m_count: usize,
    t_count: usize,
) -> impl Iterator<Item = usize> {
    (k..=t_count).step_by(m_count)
}

/// Addressing overhead of reporting `n_sensors` over `t_count` snapshots:
/// `(N / T) log2(L M)` bits per snapshot.
pub fn overhead_rate(n_sensors: usize, t_count: usize, l_count: usize, m_count: usize) -> f64 {
    n_sensors as f64 / t_count as f64 * ((l_count * m_count) as f64).log2()
}

/// Bits needed to address `count` labels.
fn ceil_log2(count: usize) -> usize {
    if count <= 1 {
        0
    } else {
        (usize::BITS - (count - 1).leading_zeros()) as usize
    }
}

/// MSB-first bit packer.
struct BitWriter<'a> {
    out: &'a mut Vec<u8>,
    used: usize,
}

impl<'a> BitWriter<'a> {
    fn new(out: &'a mut Vec<u8>) -> Self {
        BitWriter { out, used: 0 }
    }

    fn push_bit(&mut self, bit: u8) {
        if self.used % 8 == 0 {
            self.out.push(0);
        }
        if bit != 0 {
            let last = self.out.last_mut().expect("just pushed");
            *last |= 1 << (7 - self.used % 8);
        }
        self.used += 1;
    }

    fn push_uint(&mut self, value: usize, width: usize) {
        for i in (0..width).rev() {
            self.push_bit(((value >> i) & 1) as u8);
        }
    }
}

/// MSB-first bit reader.
struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    fn read_bit(&mut self) -> u8 {
        let b = (self.bytes[self.pos / 8] >> (7 - self.pos % 8)) & 1;
        self.pos += 1;
        b
    }

    fn read_uint(&mut self, width: usize) -> usize {
        let mut v = 0usize;
        for _ in 0..width {
            v = (v << 1) | self.read_bit() as usize;
        }
        v
    }
}

/// A decoded sensor report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedMessage {
    /// 1-based supercell label.
    pub supercell: usize,
    /// 1-based subcell label.
    pub subcell: usize,
    /// Payload bits in transmission order; bit `i` belongs to snapshot
    /// `subcell + i * M`.
    pub bits: Vec<u8>,
}

impl DecodedMessage {
    /// Pairs `(snapshot, bit)` for the payload under the schedule.
    pub fn snapshot_bits(&self, m_count: usize) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .map(move |(i, &b)| (self.subcell + i * m_count, b))
    }
}

/// Encoder/decoder for one partition geometry and snapshot count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireFormat {
    l_count: usize,
    m_count: usize,
    t_count: usize,
}

impl WireFormat {
    pub fn new(l_count: usize, m_count: usize, t_count: usize) -> Result<Self> {
        if l_count == 0 || m_count == 0 || t_count == 0 {
            return Err(Error::InvalidParameter {
                name: "wire format",
                reason: "L, M, T must all be positive".into(),
            });
        }
        if t_count % m_count != 0 {
            return Err(Error::Divisibility {
                what: "snapshot count T",
                value: t_count,
                by: m_count,
            });
        }
        Ok(WireFormat {
            l_count,
            m_count,
            t_count,
        })
    }

    pub fn for_partition(partition: &CellPartition, t_count: usize) -> Result<Self> {
        WireFormat::new(
            partition.supercell_count(),
            partition.subcell_count(),
            t_count,
        )
    }

    pub fn l_count(&self) -> usize {
        self.l_count
    }

    pub fn m_count(&self) -> usize {
        self.m_count
    }

    pub fn t_count(&self) -> usize {
        self.t_count
    }

    /// Header width: `ceil(log2 L) + ceil(log2 M)` bits.
    pub fn header_bits(&self) -> usize {
        ceil_log2(self.l_count) + ceil_log2(self.m_count)
    }

    /// Payload bits per message: `T / M`.
    pub fn payload_len(&self) -> usize {
        self.t_count / self.m_count
    }

    /// Whole-message length in bytes after padding.
    pub fn message_len(&self) -> usize {
        (self.header_bits() + self.payload_len()).div_ceil(8)
    }

    fn check_labels(&self, supercell: usize, subcell: usize) -> Result<()> {
        if !(1..=self.l_count).contains(&supercell) {
            return Err(Error::MalformedHeader {
                reason: format!("supercell {supercell} outside 1..={}", self.l_count),
            });
        }
        if !(1..=self.m_count).contains(&subcell) {
            return Err(Error::MalformedHeader {
                reason: format!("subcell {subcell} outside 1..={}", self.m_count),
            });
        }
        Ok(())
    }

    /// Append one encoded message to `out`.
    pub fn encode_into(
        &self,
        supercell: usize,
        subcell: usize,
        payload: &[u8],
        out: &mut Vec<u8>,
    ) -> Result<()> {
        self.check_labels(supercell, subcell)?;
        if payload.len() != self.payload_len() {
            return Err(Error::WrongPayloadLength {
                got: payload.len(),
                expected: self.payload_len(),
            });
        }
        let mut w = BitWriter::new(out);
        w.push_uint(supercell - 1, ceil_log2(self.l_count));
        w.push_uint(subcell - 1, ceil_log2(self.m_count));
        for &b in payload {
            w.push_bit(b);
        }
        Ok(())
    }

    /// Encode one message to fresh bytes.
    pub fn encode(&self, supercell: usize, subcell: usize, payload: &[u8]) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.message_len());
        self.encode_into(supercell, subcell, payload, &mut out)?;
        Ok(out)
    }

    /// Decode one message; strict about length and padding.
    pub fn decode(&self, bytes: &[u8]) -> Result<DecodedMessage> {
        let mut bits = Vec::with_capacity(self.payload_len());
        let (supercell, subcell) = self.decode_into(bytes, &mut bits)?;
        Ok(DecodedMessage {
            supercell,
            subcell,
            bits,
        })
    }

    /// Decode into a caller-owned bit buffer; returns the 1-based labels.
    pub fn decode_into(&self, bytes: &[u8], bits: &mut Vec<u8>) -> Result<(usize, usize)> {
        if bytes.len() != self.message_len() {
            return Err(Error::WrongPayloadLength {
                got: bytes.len(),
                expected: self.message_len(),
            });
        }
        let mut r = BitReader::new(bytes);
        let supercell = r.read_uint(ceil_log2(self.l_count)) + 1;
        let subcell = r.read_uint(ceil_log2(self.m_count)) + 1;
        self.check_labels(supercell, subcell)?;
        bits.clear();
        for _ in 0..self.payload_len() {
            bits.push(r.read_bit());
        }
        while r.pos % 8 != 0 {
            if r.read_bit() != 0 {
                return Err(Error::MalformedHeader {
                    reason: "nonzero padding bits".into(),
                });
            }
        }
        Ok((supercell, subcell))
    }

    /// Append one message to a batch with its 4-byte LE length prefix.
    pub fn append_to_batch(
        &self,
        supercell: usize,
        subcell: usize,
        payload: &[u8],
        out: &mut Vec<u8>,
    ) -> Result<()> {
        out.extend_from_slice(&(self.message_len() as u32).to_le_bytes());
        self.encode_into(supercell, subcell, payload, out)
    }

    /// Decode an entire batch.
    pub fn read_batch(&self, bytes: &[u8]) -> Result<Vec<DecodedMessage>> {
        let mut out = Vec::new();
        self.visit_batch(bytes, |supercell, subcell, bits| {
            out.push(DecodedMessage {
                supercell,
                subcell,
                bits: bits.to_vec(),
            });
            Ok(())
        })?;
        Ok(out)
    }

    /// Walk a batch without per-message allocation; the bit buffer is
    /// reused between calls.
    pub fn visit_batch<F>(&self, bytes: &[u8], mut f: F) -> Result<()>
    where
        F: FnMut(usize, usize, &[u8]) -> Result<()>,
    {
        let mut pos = 0usize;
        let mut bits = Vec::with_capacity(self.payload_len());
        while pos < bytes.len() {
            if bytes.len() - pos < 4 {
                return Err(Error::MalformedHeader {
                    reason: format!("truncated length prefix at byte {pos}"),
                });
            }
            let len = u32::from_le_bytes(bytes[pos..pos + 4].try_into().expect("4 bytes")) as usize;
            pos += 4;
            if bytes.len() - pos < len {
                return Err(Error::MalformedHeader {
                    reason: format!("message of {len} bytes truncated at byte {pos}"),
                });
            }
            let (supercell, subcell) = self.decode_into(&bytes[pos..pos + len], &mut bits)?;
            pos += len;
            f(supercell, subcell, &bits)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn schedule_cycles_through_subcells() {
        assert_eq!(active_subcell(1, 9), 1);
        assert_eq!(active_subcell(9, 9), 9);
        assert_eq!(active_subcell(10, 9), 1);
        assert_eq!(active_subcell(288, 9), 9);
        // Every subcell is active exactly T / M times.
        let (m, t) = (9, 288);
        let mut counts = vec![0usize; m];
        for tt in 1..=t {
            counts[active_subcell(tt, m) - 1] += 1;
        }
        assert!(counts.iter().all(|&c| c == t / m));
    }

    #[test]
    fn transmission_snapshots_match_the_schedule() {
        let ts: Vec<usize> = transmission_snapshots(7, 9, 288).collect();
        assert_eq!(ts.len(), 32);
        assert_eq!(ts[0], 7);
        assert_eq!(ts[1], 16);
        assert_eq!(*ts.last().unwrap(), 286);
        assert!(ts.iter().all(|&t| active_subcell(t, 9) == 7));
    }

    #[test]
    fn overhead_rate_worked_value() {
        // 864 sensors, 288 snapshots, 144 cells: 3 * log2(144) = 21.5098.
        let rate = overhead_rate(864, 288, 16, 9);
        assert!((rate - 21.5098).abs() < 5e-5, "{rate}");
        // Doubling sensors doubles the rate.
        assert!((overhead_rate(1728, 288, 16, 9) - 2.0 * rate).abs() < 1e-12);
    }

    #[test]
    fn header_layout_worked_example() {
        // L=16 -> 4 bits, M=9 -> 4 bits, T=288 -> 32 payload bits, 5 bytes.
        let w = WireFormat::new(16, 9, 288).unwrap();
        assert_eq!(w.header_bits(), 8);
        assert_eq!(w.payload_len(), 32);
        assert_eq!(w.message_len(), 5);
        // (j=10, k=7) -> labels 9 and 6 -> 1001 0110.
        let msg = w.encode(10, 7, &[0u8; 32]).unwrap();
        assert_eq!(msg[0], 0b1001_0110);
        assert_eq!(msg.len(), 5);
    }

    #[test]
    fn encode_decode_round_trip() {
        let w = WireFormat::new(16, 9, 18).unwrap();
        let payload = [1u8, 0];
        let msg = w.encode(10, 7, &payload).unwrap();
        let dec = w.decode(&msg).unwrap();
        assert_eq!(dec.supercell, 10);
        assert_eq!(dec.subcell, 7);
        assert_eq!(dec.bits, payload);
        let pairs: Vec<(usize, u8)> = dec.snapshot_bits(9).collect();
        assert_eq!(pairs, vec![(7, 1), (16, 0)]);
    }

    #[test]
    fn degenerate_labels_need_no_header_bits() {
        let w = WireFormat::new(1, 1, 4).unwrap();
        assert_eq!(w.header_bits(), 0);
        assert_eq!(w.message_len(), 1);
        let msg = w.encode(1, 1, &[1, 0, 1, 1]).unwrap();
        assert_eq!(msg, vec![0b1011_0000]);
        let dec = w.decode(&msg).unwrap();
        assert_eq!((dec.supercell, dec.subcell), (1, 1));
        assert_eq!(dec.bits, vec![1, 0, 1, 1]);
    }

    #[test]
    fn snapshot_count_must_divide() {
        assert!(matches!(
            WireFormat::new(4, 3, 10),
            Err(Error::Divisibility { .. })
        ));
    }

    #[test]
    fn malformed_messages_are_rejected() {
        let w = WireFormat::new(3, 1, 3).unwrap();
        // 2 header bits + 3 payload bits; label 3 (0-based) is out of range.
        let bad = vec![0b11_10100u8 << 1];
        assert!(matches!(
            w.decode(&bad),
            Err(Error::MalformedHeader { .. })
        ));
        // Wrong length.
        assert!(matches!(
            w.decode(&[0, 0]),
            Err(Error::WrongPayloadLength { .. })
        ));
        // Nonzero padding.
        let mut ok = w.encode(2, 1, &[1, 1, 1]).unwrap();
        ok[0] |= 0b0000_0001;
        assert!(matches!(
            w.decode(&ok),
            Err(Error::MalformedHeader { .. })
        ));
        // Encoding with a wrong payload length.
        assert!(matches!(
            w.encode(2, 1, &[1, 1]),
            Err(Error::WrongPayloadLength { .. })
        ));
        assert!(matches!(
            w.encode(4, 1, &[1, 1, 1]),
            Err(Error::MalformedHeader { .. })
        ));
    }

    #[test]
    fn batch_round_trip_and_visitor_agree() {
        let w = WireFormat::new(4, 3, 6).unwrap();
        let msgs = [(1, 1, [1u8, 0]), (4, 3, [0, 1]), (2, 2, [1, 1])];
        let mut batch = Vec::new();
        for (j, k, p) in &msgs {
            w.append_to_batch(*j, *k, p, &mut batch).unwrap();
        }
        let dec = w.read_batch(&batch).unwrap();
        assert_eq!(dec.len(), 3);
        for (d, (j, k, p)) in dec.iter().zip(&msgs) {
            assert_eq!((d.supercell, d.subcell), (*j, *k));
            assert_eq!(d.bits, p.to_vec());
        }
        let mut seen = Vec::new();
        w.visit_batch(&batch, |j, k, bits| {
            seen.push((j, k, bits.to_vec()));
            Ok(())
        })
        .unwrap();
        let expect: Vec<(usize, usize, Vec<u8>)> =
            msgs.iter().map(|(j, k, p)| (*j, *k, p.to_vec())).collect();
        assert_eq!(seen, expect);
    }

    #[test]
    fn truncated_batches_are_rejected() {
        let w = WireFormat::new(4, 3, 6).unwrap();
        let mut batch = Vec::new();
        w.append_to_batch(2, 2, &[1, 0], &mut batch).unwrap();
        assert!(w.read_batch(&batch[..batch.len() - 1]).is_err());
        assert!(w.read_batch(&batch[..2]).is_err());
    }

    proptest! {
        #[test]
        fn wire_round_trip_any_geometry(
            l_count in 1usize..=64,
            m_count in 1usize..=32,
            reps in 1usize..=16,
            seed in any::<u64>(),
        ) {
            let t_count = m_count * reps;
            let w = WireFormat::new(l_count, m_count, t_count).unwrap();
            let mut rng = crate::seeds::child_rng(seed, crate::seeds::DOMAIN_AUX, 0);
            use rand::Rng;
            let supercell = rng.gen_range(1..=l_count);
            let subcell = rng.gen_range(1..=m_count);
            let payload: Vec<u8> = (0..w.payload_len()).map(|_| rng.gen_range(0..=1u8)).collect();
            let msg = w.encode(supercell, subcell, &payload).unwrap();
            prop_assert_eq!(msg.len(), w.message_len());
            let dec = w.decode(&msg).unwrap();
            prop_assert_eq!(dec.supercell, supercell);
            prop_assert_eq!(dec.subcell, subcell);
            prop_assert_eq!(dec.bits, payload);
        }
    }
}
