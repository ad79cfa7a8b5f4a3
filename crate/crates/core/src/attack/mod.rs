pub mod random; pub mod systematic;
