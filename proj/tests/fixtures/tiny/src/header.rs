pub fn parse_header(bytes: &[u8]) -> usize {
    bytes.len()
}
