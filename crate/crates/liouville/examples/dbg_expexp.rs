use liouville::devfn::DevelopingFunction;
use liouville::metric::{pushforward, Point2};
fn main() {
    let f = DevelopingFunction::exp_exp();
    for b in [-10.0, -6.0, 0.0, 5.0, 6.5, 7.0, 10.0] {
        let img = pushforward(&f, Point2::new(b, 0.0));
        println!("b={b}: upper {:?}", img);
        let img = pushforward(&f, Point2::new(b, -std::f64::consts::PI));
        println!("c={b}: lower {:?}", img);
    }
}
